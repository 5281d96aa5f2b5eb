"""Drive the HTTP service end to end: submit a job, poll it, read the result.

Runs the service in-process on a free port, which is exactly how the web UI
consumes it: POST /explain, poll GET /jobs/{id} for progress, then render the
finished document.
"""

import json
import socket
import threading
import time
import urllib.request

import uvicorn

from chesshap.service import ServiceConfig, build_app

with socket.socket() as sock:
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]

server = uvicorn.Server(
    uvicorn.Config(build_app(ServiceConfig()), host="127.0.0.1", port=port, log_level="error")
)
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)
base = f"http://127.0.0.1:{port}"


def call(path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    request = urllib.request.Request(
        base + path, data=data, headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(request) as response:
        return json.loads(response.read())


print("engines:", [e["id"] for e in call("/engines")["engines"]])

job = call("/explain", {"fen": "8/2k5/2q5/8/4R3/4RK2/8/8 w - - 0 1", "seed": 7})
print("job id:", job["job_id"])

while True:
    record = call(f"/jobs/{job['job_id']}")
    progress = record["progress"]
    print(f"  state={record['state']:<8} progress={progress['done']}/{progress['total']}")
    if record["state"] in ("done", "failed"):
        break
    time.sleep(0.05)

document = record["result"]
print("\nfull value:", document["full_value"])
for contribution in document["contributions"]:
    print(
        f"  {contribution['square']} {contribution['color']} {contribution['piece']}: "
        f"{contribution['phi']:+.5f}"
    )

server.should_exit = True
