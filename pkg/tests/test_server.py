"""Instrument-server tests: command grammar against a bare session, then
the same guarantees over a live TCP connection."""

import socket

import numpy as np
import pytest

from squidemu.device import EmulatorConfig
from squidemu.protocols import s_curve
from squidemu.server import InstrumentServer, InstrumentSession, handle_command

KEYS = ("RIN", "RNORM", "VTH0", "VOFF", "SIGMA", "MODDEPTH", "GDC", "SEED")


@pytest.fixture
def session():
    return InstrumentSession()


def test_defaults_via_get(session):
    assert handle_command(session, "GET RIN") == "1000"
    assert handle_command(session, "GET VTH0") == "0.09"
    assert handle_command(session, "GET RNORM") == "225"
    assert handle_command(session, "GET SEED") == "0"


def test_set_get_round_trip_every_key(session):
    values = {
        "RIN": 1500.0,
        "RNORM": 100.0,
        "VTH0": 0.12,
        "VOFF": 0.001,
        "SIGMA": 0.0123456789,
        "MODDEPTH": 0.05,
        "GDC": 3000.0,
        "SEED": 42.0,
    }
    for key in KEYS:
        assert handle_command(session, f"SET {key} {values[key]!r}") == "OK"
        assert float(handle_command(session, f"GET {key}")) == values[key]


def test_commands_case_insensitive(session):
    assert handle_command(session, "set vth0 0.095") == "OK"
    assert handle_command(session, "get VTH0") == "0.095"


def test_pulse_examples(session):
    assert handle_command(session, "PULSE 100e-6") == "1"
    assert handle_command(session, "PULSE 80e-6") == "0"
    assert handle_command(session, "PULSE -100e-6") == "1"


def test_pulse_stream_deterministic(session):
    handle_command(session, "SET SIGMA 0.005")
    first = [handle_command(session, "PULSE 90e-6") for _ in range(20)]
    assert set(first) == {"0", "1"}  # noisy threshold around the midpoint
    handle_command(session, "RESET")  # rewinds the pulse counter
    assert [handle_command(session, "PULSE 90e-6") for _ in range(20)] == first
    handle_command(session, "SET SEED 1")
    other = [handle_command(session, "PULSE 90e-6") for _ in range(20)]
    assert other != first


def test_idc_sets_flux_bias(session):
    assert handle_command(session, "IDC 0.504e-3") == "OK"
    # threshold drops to 50 mV at the modulation minimum
    assert handle_command(session, "PULSE 60e-6") == "1"
    assert handle_command(session, "IDC 0") == "OK"
    assert handle_command(session, "PULSE 60e-6") == "0"


def test_idc_clamps_to_fullscale(session):
    assert handle_command(session, "IDC 10e-3") == "OK"
    assert session.i_dc == pytest.approx(2e-3)
    assert handle_command(session, "IDC -10e-3") == "OK"
    assert session.i_dc == pytest.approx(-2e-3)


def test_scurve_line_matches_protocol(session):
    handle_command(session, "SET SIGMA 0.005")
    handle_command(session, "SET SEED 9")
    line = handle_command(session, "SCURVE 0 120e-6 13 100")
    values = [float(tok) for tok in line.split(",")]
    curve = s_curve(
        EmulatorConfig(noise_sigma=0.005), np.linspace(0, 120e-6, 13), n_pulses=100, seed=9
    )
    assert values == pytest.approx(list(curve.p_sw))


def test_error_codes(session):
    assert handle_command(session, "BOGUS 1 2") == "ERR 1 unknown"
    assert handle_command(session, "") == "ERR 1 unknown"
    assert handle_command(session, "SET NOSUCH 1") == "ERR 1 unknown"
    assert handle_command(session, "GET NOSUCH") == "ERR 1 unknown"
    assert handle_command(session, "SET RIN") == "ERR 2 parse"
    assert handle_command(session, "SET RIN abc") == "ERR 2 parse"
    assert handle_command(session, "GET") == "ERR 2 parse"
    assert handle_command(session, "PULSE") == "ERR 2 parse"
    assert handle_command(session, "PULSE xyz") == "ERR 2 parse"
    assert handle_command(session, "RESET 1") == "ERR 2 parse"
    assert handle_command(session, "SCURVE 0 1 2") == "ERR 2 parse"
    assert handle_command(session, "SET RIN -5") == "ERR 3 range"
    assert handle_command(session, "SET VTH0 0.01") == "ERR 3 range"  # below mod_depth
    assert handle_command(session, "SET SEED 1.5") == "ERR 3 range"
    assert handle_command(session, "PULSE inf") == "ERR 3 range"
    assert handle_command(session, "SCURVE 0 1 0 10") == "ERR 3 range"


def test_config_mutation_applies_to_next_command(session):
    assert handle_command(session, "PULSE 95e-6") == "1"
    handle_command(session, "SET VTH0 0.12")
    assert handle_command(session, "PULSE 95e-6") == "0"


def test_quit_closes(session):
    assert handle_command(session, "QUIT") == "OK"
    assert session.closed


# --- live TCP ---------------------------------------------------------------


class _Client:
    def __init__(self, address):
        self.sock = socket.create_connection(address, timeout=5)
        self.file = self.sock.makefile("rwb")

    def ask(self, line: bytes) -> str:
        self.file.write(line + b"\n")
        self.file.flush()
        return self.file.readline().decode().rstrip("\n")

    def close(self):
        self.file.close()
        self.sock.close()


@pytest.fixture
def server():
    import threading

    srv = InstrumentServer(("127.0.0.1", 0))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def test_tcp_get_set_round_trip(server):
    client = _Client(server.server_address)
    try:
        assert client.ask(b"GET VTH0") == "0.09"
        for key in KEYS:
            original = client.ask(f"GET {key}".encode())
            assert client.ask(f"SET {key} {original}".encode()) == "OK"
            assert client.ask(f"GET {key}".encode()) == original
    finally:
        client.close()


def test_tcp_sessions_are_isolated(server):
    a = _Client(server.server_address)
    b = _Client(server.server_address)
    try:
        assert a.ask(b"SET VTH0 0.2") == "OK"
        assert b.ask(b"GET VTH0") == "0.09"  # fresh session, default config
    finally:
        a.close()
        b.close()


def test_tcp_malformed_lines_keep_connection_alive(server):
    client = _Client(server.server_address)
    try:
        assert client.ask(b"\xff\xfe garbage") == "ERR 2 parse"
        assert client.ask(b"WHAT") == "ERR 1 unknown"
        assert client.ask(b"SET RIN banana") == "ERR 2 parse"
        assert client.ask(b"GET RIN") == "1000"  # still serving
    finally:
        client.close()


def test_tcp_quit_closes_connection(server):
    client = _Client(server.server_address)
    try:
        assert client.ask(b"QUIT") == "OK"
        assert client.file.readline() == b""  # peer closed
    finally:
        client.close()


def test_tcp_every_line_gets_one_response(server):
    client = _Client(server.server_address)
    try:
        lines = [b"GET RIN", b"NOPE", b"SET", b"PULSE 1e-4", b"RESET"]
        for line in lines:
            client.file.write(line + b"\n")
        client.file.flush()
        responses = [client.file.readline() for _ in lines]
        assert all(r.endswith(b"\n") and len(r) > 1 for r in responses)
    finally:
        client.close()
