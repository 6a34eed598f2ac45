"""Writes scipy.signal reference results for the peak-finding tests."""
import numpy as np
from scipy.signal import find_peaks, peak_widths

rng = np.random.default_rng(11)
lines = []
for case in range(40):
    n = int(rng.integers(30, 200))
    x = np.cumsum(rng.normal(0, 1, n))
    x = np.convolve(x, np.ones(5) / 5, mode="same")
    x = np.round(x, 6)
    prom = float(rng.choice([0.05, 0.3, 1.0, 2.0]))
    dist = int(rng.choice([1, 3, 8, 20]))
    rel = float(rng.choice([0.3, 0.5, 0.714285714285714, 0.9]))
    peaks, props = find_peaks(x, prominence=prom, distance=dist)
    w = peak_widths(x, peaks, rel_height=rel, prominence_data=(props["prominences"], props["left_bases"], props["right_bases"]))
    lines.append(f"case {prom!r} {dist} {rel!r}")
    lines.append("x " + " ".join(repr(float(v)) for v in x))
    lines.append("peaks " + " ".join(str(int(p)) for p in peaks))
    lines.append("prom " + " ".join(repr(float(v)) for v in props["prominences"]))
    lines.append("left " + " ".join(repr(float(v)) for v in w[2]))
    lines.append("right " + " ".join(repr(float(v)) for v in w[3]))
with open(__file__.replace("gen_scipy_peaks.py", "scipy_peaks.txt"), "w") as f:
    f.write("\n".join(lines) + "\n")
