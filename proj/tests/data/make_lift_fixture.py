#!/usr/bin/env python3
"""Builds the committed lift fixture: inputs plus golden fused volumes.

The goldens are produced by an independent reimplementation of the sampling
and fusion arithmetic. Double-precision intermediates and the exact points
where values round to float32 mirror the library, so the CLI output must
match the goldens byte for byte.
"""

import json
import math
import struct
from pathlib import Path

import numpy as np

OUT = Path(__file__).parent / "lift_fixture"

DTYPE_CODES = {"f32": 0, "f64": 1, "u8": 2, "i64": 3}
DTYPE_NP = {"f32": "<f4", "f64": "<f8", "u8": "u1", "i64": "<i8"}


def write_occt(path, dtype, array):
    array = np.ascontiguousarray(array, dtype=DTYPE_NP[dtype])
    with open(path, "wb") as f:
        f.write(b"OCCT")
        f.write(struct.pack("<H", 1))
        f.write(struct.pack("<BB", DTYPE_CODES[dtype], array.ndim))
        for e in array.shape:
            f.write(struct.pack("<Q", e))
        f.write(array.tobytes())


# ---------------------------------------------------------------- scene setup

FX = FY = 24.0
CX = CY = 8.0
WIDTH = HEIGHT = 16

THETA = 0.35
CAM_POS = (0.3, 1.0, 1.1)

GRID_DIMS = (6, 5, 4)
GRID_ORIGIN = (0.8, 0.75, 0.65)
VOXEL = 0.125

D_MIN, D_MAX, N_BINS = 0.25, 2.0, 5
CHANNELS = 2
SCALES = [1, 2, 4, 8]


def camera_pose():
    # camera forward is horizontal at heading theta, image +y points down
    c, s = math.cos(THETA), math.sin(THETA)
    fwd = (c, s, 0.0)
    down = (0.0, 0.0, -1.0)
    right = (s, -c, 0.0)  # cross(down, fwd)
    px, py, pz = CAM_POS
    return [
        right[0], down[0], fwd[0], px,
        right[1], down[1], fwd[1], py,
        right[2], down[2], fwd[2], pz,
        0.0, 0.0, 0.0, 1.0,
    ]


def rigid_inverse(m):
    r = [1.0, 0, 0, 0, 0, 1.0, 0, 0, 0, 0, 1.0, 0, 0, 0, 0, 1.0]
    r[0], r[1], r[2] = m[0], m[4], m[8]
    r[4], r[5], r[6] = m[1], m[5], m[9]
    r[8], r[9], r[10] = m[2], m[6], m[10]
    tx, ty, tz = m[3], m[7], m[11]
    r[3] = -(r[0] * tx + r[1] * ty + r[2] * tz)
    r[7] = -(r[4] * tx + r[5] * ty + r[6] * tz)
    r[11] = -(r[8] * tx + r[9] * ty + r[10] * tz)
    return r


# ------------------------------------------------------- arithmetic mirrors

def project_voxels(w2c):
    dims = GRID_DIMS
    count = dims[0] * dims[1] * dims[2]
    u = [0.0] * count
    v = [0.0] * count
    z = [0.0] * count
    valid = [False] * count
    idx = 0
    for i in range(dims[0]):
        for j in range(dims[1]):
            for k in range(dims[2]):
                px = GRID_ORIGIN[0] + VOXEL * (i + 0.5)
                py = GRID_ORIGIN[1] + VOXEL * (j + 0.5)
                pz = GRID_ORIGIN[2] + VOXEL * (k + 0.5)
                cx = w2c[0] * px + w2c[1] * py + w2c[2] * pz + w2c[3]
                cy = w2c[4] * px + w2c[5] * py + w2c[6] * pz + w2c[7]
                cz = w2c[8] * px + w2c[9] * py + w2c[10] * pz + w2c[11]
                z[idx] = cz
                if cz > 1e-9:
                    uu = FX * cx / cz + CX
                    vv = FY * cy / cz + CY
                    u[idx] = uu
                    v[idx] = vv
                    valid[idx] = 0.0 <= uu < WIDTH and 0.0 <= vv < HEIGHT
                idx += 1
    return u, v, z, valid


def bin_index(depth):
    delta = 2.0 * (D_MAX - D_MIN) / (float(N_BINS) * (float(N_BINS) + 1.0))
    radicand = 1.0 + 8.0 * (depth - D_MIN) / delta
    l = math.floor(-0.5 + 0.5 * math.sqrt(radicand if radicand > 0.0 else 0.0))
    return max(0, min(N_BINS - 1, int(l)))


def nearest_pixel(x, extent):
    r = float(np.rint(x))  # ties to even
    if r <= 0.0:
        return 0
    if r >= extent - 1:
        return extent - 1
    return int(r)


def bilinear_taps(x, y, width, height):
    xf, yf = math.floor(x), math.floor(y)
    tx, ty = x - xf, y - yf

    def clamp_idx(f, extent):
        if f <= 0.0:
            return 0
        if f >= extent - 1:
            return extent - 1
        return int(f)

    x0, x1 = clamp_idx(xf, width), clamp_idx(xf + 1.0, width)
    y0, y1 = clamp_idx(yf, height), clamp_idx(yf + 1.0, height)
    w00 = (1.0 - tx) * (1.0 - ty)
    w01 = tx * (1.0 - ty)
    w10 = (1.0 - tx) * ty
    w11 = tx * ty
    return x0, x1, y0, y1, w00, w01, w10, w11


def downsample(dist, factor):
    nb, h, w = dist.shape
    ho, wo = h // factor, w // factor
    out = np.zeros((nb, ho, wo), dtype=np.float32)
    inv_area = 1.0 / (float(factor) * factor)
    for b in range(nb):
        for ro in range(ho):
            for co in range(wo):
                acc = 0.0
                for dr in range(factor):
                    for dc in range(factor):
                        acc += float(dist[b, ro * factor + dr, co * factor + dc])
                out[b, ro, co] = np.float32(acc * inv_area)
    return out


def fuse(feats, dists, proj, mode):
    u, v, z, valid = proj
    count = len(u)
    vol = np.zeros((count, CHANNELS), dtype=np.float32)
    for vx in range(count):
        if not valid[vx]:
            continue
        b = bin_index(z[vx])
        for scale in SCALES:
            feat = feats[scale]
            dist = dists[scale]
            _, h, w = feat.shape
            x = u[vx] * (1.0 / scale)
            y = v[vx] * (1.0 / scale)
            if mode == "nearest":
                col = nearest_pixel(x, w)
                row = nearest_pixel(y, h)
                wgt = dist[b, row, col]  # float32
                for c in range(CHANNELS):
                    vol[vx, c] = vol[vx, c] + wgt * feat[c, row, col]
            else:
                x0, x1, y0, y1, w00, w01, w10, w11 = bilinear_taps(x, y, w, h)
                wgt = np.float32(w00 * float(dist[b, y0, x0]) +
                                 w01 * float(dist[b, y0, x1]) +
                                 w10 * float(dist[b, y1, x0]) +
                                 w11 * float(dist[b, y1, x1]))
                for c in range(CHANNELS):
                    fv = np.float32(w00 * float(feat[c, y0, x0]) +
                                    w01 * float(feat[c, y0, x1]) +
                                    w10 * float(feat[c, y1, x0]) +
                                    w11 * float(feat[c, y1, x1]))
                    vol[vx, c] = vol[vx, c] + wgt * fv
    return vol.reshape(GRID_DIMS + (CHANNELS,))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(42)

    pose = camera_pose()
    with open(OUT / "camera.json", "w") as f:
        json.dump({"fx": FX, "fy": FY, "cx": CX, "cy": CY,
                   "width": WIDTH, "height": HEIGHT, "cam_to_world": pose}, f, indent=2)
        f.write("\n")

    feats = {}
    for scale in SCALES:
        h = HEIGHT // scale
        w = WIDTH // scale
        feats[scale] = rng.uniform(-2.0, 2.0, size=(CHANNELS, h, w)).astype(np.float32)
        write_occt(OUT / f"feat{scale}.occt", "f32", feats[scale])

    raw = rng.uniform(0.01, 1.0, size=(N_BINS, HEIGHT, WIDTH))
    dist1 = (raw / raw.sum(axis=0, keepdims=True)).astype(np.float32)
    write_occt(OUT / "dist1.occt", "f32", dist1)

    dists = {s: (dist1 if s == 1 else downsample(dist1, s)) for s in SCALES}

    w2c = rigid_inverse(pose)
    proj = project_voxels(w2c)
    n_valid = sum(proj[3])
    print(f"valid voxels: {n_valid}/{len(proj[3])}")
    assert 0 < n_valid < len(proj[3]), "fixture should mix visible and hidden voxels"

    for mode in ("nearest", "bilinear"):
        write_occt(OUT / f"golden_{mode}.occt", "f32", fuse(feats, dists, proj, mode))
    print("wrote", OUT)


if __name__ == "__main__":
    main()
