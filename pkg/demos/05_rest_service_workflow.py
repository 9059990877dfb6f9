"""
The REST workflow, end to end
=============================

What a UI (or curl) does: upload a CSV, validate a pipeline, submit a run,
poll until it finishes, fetch the score curve. Needs httpx installed
(`pip install tods[dev]` or `pip install httpx`).
"""

import json
import socket
import subprocess
import sys
import time

import httpx

from tods.benchmark import dataset_to_csv, make_spike_benchmark
from tods.pipeline import serialize_pipeline
from tods.search import default_pipeline

with socket.socket() as s:
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
base = f"http://127.0.0.1:{port}"

# `tods serve` in a child process; a real deployment would run it directly.
server = subprocess.Popen(
    [sys.executable, "-m", "tods", "serve", "--port", str(port)],
    stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
try:
    while True:
        try:
            httpx.get(base + "/", timeout=0.5)
            break
        except httpx.TransportError:
            time.sleep(0.1)

    # The registry endpoint is what builds a UI palette.
    families = httpx.get(base + "/api/primitives").json()["families"]
    for family, members in families.items():
        print(f"{family}: {len(members)} primitives")

    # Upload: multipart CSV plus the column index of the labels.
    ds = make_spike_benchmark()
    r = httpx.post(base + "/api/datasets",
                   files={"file": ("bench.csv", dataset_to_csv(ds).encode(), "text/csv")},
                   data={"target_index": "2"})
    handle = r.json()
    print(f"\nuploaded dataset {handle['id']}: {handle['n']} rows, "
          f"labels={handle['has_labels']}")

    # Validation returns diagnostics; an empty list means runnable.
    doc = json.loads(serialize_pipeline(default_pipeline()))
    r = httpx.post(base + "/api/pipelines/validate", json=doc)
    print(f"validate: diagnostics={r.json()['diagnostics']}")

    # Runs are asynchronous: submit returns 202 and a job id immediately.
    r = httpx.post(base + "/api/runs", json={
        "dataset_id": handle["id"], "pipeline": doc, "metric": "f1_pa"})
    job_id = r.json()["job_id"]
    print(f"submitted run {job_id}")

    while True:
        job = httpx.get(f"{base}/api/runs/{job_id}").json()
        if job["status"] in ("succeeded", "failed"):
            break
        time.sleep(0.1)
    result = job["result"]
    print(f"run {job['status']}: aggregate {result['metric']} = "
          f"{result['aggregate']:.4f} over {len(result['folds'])} folds")

    curve = httpx.get(f"{base}/api/runs/{job_id}/scores").json()["scores"]
    shown = [round(v, 2) for v in curve[:6] if v is not None]
    print(f"score curve: {len(curve)} points, head {shown}")
finally:
    server.terminate()
    server.wait(timeout=10)
