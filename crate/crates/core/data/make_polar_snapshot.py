"""Regenerate polar_motion_c04_0p1yr.txt from an IERS EOP C04 daily file.

Usage: python3 make_polar_snapshot.py path/to/eopc04.1962-now > polar_motion_c04_0p1yr.txt

Pole coordinates are linearly interpolated (in MJD) onto Julian-year epochs
1962.0, 1962.1, ..., 2021.8. Epoch J = 2000 + (MJD - 51544.5) / 365.25.
"""
import sys

import numpy as np


def main(path):
    mjd, x, y = [], [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            cols = line.split()
            mjd.append(float(cols[4]))
            x.append(float(cols[5]))
            y.append(float(cols[6]))
    mjd = np.asarray(mjd)
    epochs = np.round(1962.0 + 0.1 * np.arange(599), 1)
    target = 51544.5 + (epochs - 2000.0) * 365.25
    xi = np.interp(target, mjd, x)
    yi = np.interp(target, mjd, y)
    print("# IERS EOP 20 C04 pole coordinates, resampled to 0.1 Julian-year spacing")
    print("# source: hpiers.obspm.fr/iers/eop/eopc04/eopc04.1962-now via astropy-iers-data 0.2026.10.12.1.3.27")
    print("# retrieved: 2026-10-16; linear interpolation in MJD onto epochs 1962.0..2021.8")
    print("# columns: epoch (Julian years)  x (arcsec)  y (arcsec)")
    for e, a, b in zip(epochs, xi, yi):
        print(f"{e:.1f} {a:.7f} {b:.7f}")


if __name__ == "__main__":
    main(sys.argv[1])
