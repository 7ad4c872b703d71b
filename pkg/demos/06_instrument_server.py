"""Driving the emulator over its TCP instrument interface.

Starts the server on an ephemeral port, connects as a plain socket client,
and runs a miniature pulsed measurement by hand: set the noise level, pick
a flux bias, fire pulses, count switches.  This is the same wire surface a
readout program under development would talk to instead of a cold device.
"""

import socket
import threading

from squidemu.server import InstrumentServer

server = InstrumentServer(("127.0.0.1", 0))
threading.Thread(target=server.serve_forever, daemon=True).start()
host, port = server.server_address
print(f"instrument listening on {host}:{port}")

sock = socket.create_connection((host, port))
io = sock.makefile("rwb")


def ask(line: str) -> str:
    io.write(line.encode() + b"\n")
    io.flush()
    return io.readline().decode().strip()


print("GET VTH0        ->", ask("GET VTH0"))
print("SET SIGMA 0.005 ->", ask("SET SIGMA 0.005"))
print("SET SEED 7      ->", ask("SET SEED 7"))
print("IDC 0.25e-3     ->", ask("IDC 0.25e-3"))

# 200 pulses right at the working point: expect roughly half to switch
n, amplitude = 200, "70e-6"
switched = sum(ask(f"PULSE {amplitude}") == "1" for _ in range(n))
print(f"{n} pulses at {amplitude} A: P_sw = {switched / n:.2f}")

# one full S-curve in a single command
line = ask("SCURVE 50e-6 90e-6 9 200")
print("SCURVE 50e-6 90e-6 9 200 ->")
for current, p in zip(range(50, 91, 5), line.split(",")):
    print(f"    {current} uA: p_sw = {p}")

print("QUIT            ->", ask("QUIT"))
io.close()
sock.close()
server.shutdown()
server.server_close()
