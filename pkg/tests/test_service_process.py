"""The service as a real OS process: banner, SIGTERM, resume after restart."""

import hashlib
import signal
import subprocess
import sys
import time

import pytest
import requests


def start_serve(store_root, extra_args=()):
    proc = subprocess.Popen(
        [sys.executable, "-m", "wildtrap", "serve",
         "--store", str(store_root), "--listen", "127.0.0.1:0", *extra_args],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    deadline = time.monotonic() + 30
    banner = ""
    while time.monotonic() < deadline:
        line = proc.stdout.readline()
        if "serving on" in line:
            banner = line
            break
    assert banner, "service never announced itself"
    base = banner.strip().rsplit(" ", 1)[1]
    return proc, base


@pytest.mark.slow
def test_sigterm_mid_upload_then_resume(tmp_path):
    store_root = tmp_path / "store"
    proc, base = start_serve(store_root)
    try:
        data = b"m" * 20000
        manifest = {
            "station_id": "st-1", "camera_id": "cam-000",
            "captured_at": "2025-01-01T00:00:00Z",
            "content_sha256": hashlib.sha256(data).hexdigest(),
            "byte_length": len(data), "modality": "visual", "sequence_no": 0,
        }
        sid = requests.post(f"{base}/v1/uploads", json=manifest).json()["session_id"]
        requests.put(f"{base}/v1/uploads/{sid}", params={"offset": 0},
                     data=data[:12000]).raise_for_status()
    finally:
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(timeout=30) == 0  # clean shutdown exits 0

    proc2, base2 = start_serve(store_root)
    try:
        begun = requests.post(f"{base2}/v1/uploads", json=manifest).json()
        assert begun["resume_offset"] == 12000
        sid2 = begun["session_id"]
        requests.put(f"{base2}/v1/uploads/{sid2}", params={"offset": 12000},
                     data=data[12000:]).raise_for_status()
        final = requests.post(f"{base2}/v1/uploads/{sid2}/finalize")
        assert final.status_code == 200
        assert final.json()["sha256"] == manifest["content_sha256"]
    finally:
        proc2.send_signal(signal.SIGTERM)
        assert proc2.wait(timeout=30) == 0


@pytest.mark.slow
def test_busy_port_exits_nonzero(tmp_path):
    proc, base = start_serve(tmp_path / "a")
    try:
        port = base.rsplit(":", 1)[1]
        clash = subprocess.run(
            [sys.executable, "-m", "wildtrap", "serve",
             "--store", str(tmp_path / "b"), "--listen", f"127.0.0.1:{port}"],
            capture_output=True, text=True, timeout=60)
        assert clash.returncode != 0
        assert "error" in clash.stderr.lower() or "Errno" in clash.stderr
    finally:
        proc.send_signal(signal.SIGTERM)
        proc.wait(timeout=30)
