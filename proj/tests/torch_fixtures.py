"""Cross-checks the C++ backbone against an independent PyTorch forward pass.

Generates seed-7 test weights with the CLI, reads them back with a Python
DWSDW1 reader, runs VGG16 through relu5_3 in torch, writes DWTEN1 fixtures and
asks `deepwsd verify-fixtures` to compare. Exits 77 (skip) without torch.
"""

import json
import pathlib
import struct
import subprocess
import sys
import tempfile
import zlib

try:
    import numpy as np
    import torch
    import torch.nn.functional as F
except ImportError:
    print("torch/numpy not available, skipping")
    sys.exit(77)

BLOCKS = [2, 2, 3, 3, 3]


def read_archive(path):
    data = pathlib.Path(path).read_bytes()
    assert data[:7] == b"DWSDW1\0", "bad magic"
    body, (crc,) = data[7:-4], struct.unpack("<I", data[-4:])
    assert zlib.crc32(body) == crc, "checksum mismatch"
    (count,) = struct.unpack_from("<I", body, 0)
    off, out = 4, {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", body, off)
        name = body[off + 2:off + 2 + nlen].decode()
        off += 2 + nlen
        ndim = body[off]
        dims = struct.unpack_from("<%dI" % ndim, body, off + 1)
        off += 1 + 4 * ndim
        size = int(np.prod(dims))
        out[name] = np.frombuffer(body, "<f4", size, off).reshape(dims).copy()
        off += 4 * size
    assert off == len(body)
    return out


def write_tensor(path, arr):
    arr = np.ascontiguousarray(arr, dtype="<f4")
    header = b"DWTEN1" + bytes([arr.ndim]) + struct.pack("<%dI" % arr.ndim, *arr.shape)
    pathlib.Path(path).write_bytes(header + arr.tobytes())


def forward(image, weights, mean, std):
    x = torch.from_numpy(image)[None]
    x = (x - torch.tensor(mean).view(1, 3, 1, 1)) / torch.tensor(std).view(1, 3, 1, 1)
    stages = []
    for b, depth in enumerate(BLOCKS, start=1):
        if b > 1:
            x = F.max_pool2d(x, 2)
        for i in range(1, depth + 1):
            w = torch.from_numpy(weights["conv%d_%d.weight" % (b, i)])
            bias = torch.from_numpy(weights["conv%d_%d.bias" % (b, i)])
            x = F.relu(F.conv2d(x, w, bias, padding=1))
        stages.append(x[0].numpy())
    return stages


def main():
    cli, source_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    consts = json.loads((source_dir / "share" / "backbone_constants.json").read_text())
    torch.set_num_threads(1)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        subprocess.run([cli, "gen-test-weights", "--seed", "7", "--out", str(tmp / "w.bin")],
                       check=True, stdout=subprocess.DEVNULL)
        weights = read_archive(tmp / "w.bin")

        rng = np.random.default_rng(2024)
        full = rng.random((3, 70, 90), dtype=np.float32)
        m = consts["spatial_multiple"]
        h, w = full.shape[1] // m * m, full.shape[2] // m * m
        top, left = (full.shape[1] - h) // 2, (full.shape[2] - w) // 2
        image = np.ascontiguousarray(full[:, top:top + h, left:left + w])

        fixtures = tmp / "fixtures"
        fixtures.mkdir()
        # the uncropped image goes in so the C++ crop is exercised too
        write_tensor(fixtures / "input.dwt", full)
        with torch.no_grad():
            stages = forward(image, weights, consts["channel_mean"], consts["channel_std"])
        for s, t in enumerate(stages, start=1):
            write_tensor(fixtures / ("stage%d.dwt" % s), t)

        r = subprocess.run([cli, "verify-fixtures", "--fixtures", str(fixtures),
                            "--weights", str(tmp / "w.bin")])
        return r.returncode


if __name__ == "__main__":
    sys.exit(main())
