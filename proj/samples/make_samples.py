#!/usr/bin/env python3
"""Regenerates the sample project, walkable space, config and scenarios.

Everything is laid out along a 20 m wide corridor running 150 m north from
the origin (local frame: x east, y up, z north, meters).
"""
import json
import math
from pathlib import Path

A = 6378137.0
F = 1 / 298.257223563
E2 = F * (2 - F)
ORIGIN = (41.8781, -87.6298, 0.0)
HERE = Path(__file__).resolve().parent


def ecef(lat, lon, h):
    la, lo = math.radians(lat), math.radians(lon)
    n = A / math.sqrt(1 - E2 * math.sin(la) ** 2)
    return ((n + h) * math.cos(la) * math.cos(lo), (n + h) * math.cos(la) * math.sin(lo),
            (n * (1 - E2) + h) * math.sin(la))


def geodetic(x, y, z):
    lon = math.atan2(y, x)
    p = math.hypot(x, y)
    lat = math.atan2(z, p * (1 - E2))
    for _ in range(50):
        n = A / math.sqrt(1 - E2 * math.sin(lat) ** 2)
        h = p / math.cos(lat) - n
        lat = math.atan2(z, p * (1 - E2 * n / (n + h)))
    n = A / math.sqrt(1 - E2 * math.sin(lat) ** 2)
    return math.degrees(lat), math.degrees(lon), p / math.cos(lat) - n


def to_geo(x, y, z):
    la, lo = math.radians(ORIGIN[0]), math.radians(ORIGIN[1])
    east = (-math.sin(lo), math.cos(lo), 0.0)
    up = (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
    north = (-math.sin(la) * math.cos(lo), -math.sin(la) * math.sin(lo), math.cos(la))
    o = ecef(*ORIGIN)
    p = [o[i] + x * east[i] + y * up[i] + z * north[i] for i in range(3)]
    lat, lon, h = geodetic(*p)
    return {"lat": round(lat, 10), "lon": round(lon, 10), "height": round(h, 4)}


def item(id_, x, y, z, scale, kind="image_quad", asset=""):
    return {"id": id_, "kind": kind, **to_geo(x, y, z), "orientation": [1, 0, 0, 0],
            "scale": scale, "asset_ref": asset, "metadata": {}}


def write(name, doc):
    (HERE / name).write_text(json.dumps(doc, indent=2) + "\n")


write("project.json", {
    "format_version": 1, "name": "corridor",
    "origin": {"lat": ORIGIN[0], "lon": ORIGIN[1], "height": ORIGIN[2]},
    "items": [
        item("welcome-sign", 2.5, 2, 32.5, [2, 1, 0.05], asset="assets/welcome.png"),
        item("plaque", 0, 1.5, 10, [1, 0.75, 0.01], kind="fiducial", asset="assets/plaque.jpg"),
        item("mural", -7.5, 2.5, 77.5, [3, 2, 0.05], asset="assets/mural.png"),
    ]})

write("walkable.json", [
    {"name": "corridor", "vertices": [[-10, -10], [10, -10], [10, 150], [-10, 150]]}])

write("config.json", {"bind_addr": "127.0.0.1:8080", "tick_hz": 10,
                      "thresholds": {"rot_deg": 10, "pos_m": 5}})


def walk(name, length=100, east=0.0, **extra):
    doc = {"name": name, "profile": "pixel-3",
           "path": [to_geo(east, 1.6, 0), to_geo(east, 1.6, length)],
           "speed_m_s": 1.0, "slam": True, "fiducials": True,
           "noise": {"gps_sigma_m": 0, "seed": 1}}
    doc.update(extra)
    write(f"scenarios/{name}.json", doc)


walk("walker")
walk("noisy", east=2.0, noise={"gps_sigma_m": 3, "seed": 7})
walk("gps-bias", east=-2.0, slam=False, fiducials=False,
     faults=[{"kind": "gps_bias", "start_s": 10, "duration_s": 60, "offset_m": [12, 0, 0]}])
walk("gyro-drift", east=4.0, slam=False, fiducials=False,
     faults=[{"kind": "gyro_drift", "start_s": 10, "duration_s": 60, "deg_s": 5, "max_deg": 30}])
