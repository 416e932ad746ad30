#!/usr/bin/env python3
"""Regenerates the G.652.D fibre curve assets in data/.

attenuation: Rayleigh + constant + infrared tail + residual OH band at 1383 nm.
raman gain:  Hollenbeck-Cantrell intermediate-broadening model of silica,
             scaled to a 0.42 1/(W km) peak (A_eff already folded in).
"""
import csv
import pathlib

import numpy as np
from scipy.special import voigt_profile

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"

# (position cm^-1, amplitude, gaussian FWHM, lorentzian FWHM)
MODES = [
    (56.25, 1.00, 52.10, 17.37),
    (100.00, 11.40, 110.42, 38.81),
    (231.25, 36.67, 175.00, 58.33),
    (362.50, 67.67, 162.50, 54.17),
    (463.00, 74.00, 135.33, 45.11),
    (497.00, 4.50, 24.50, 8.17),
    (611.50, 6.80, 41.50, 13.83),
    (691.67, 4.60, 155.00, 51.67),
    (793.67, 4.20, 59.50, 19.83),
    (835.50, 4.50, 64.30, 21.43),
    (930.00, 2.70, 150.00, 50.00),
    (1080.00, 3.10, 91.00, 30.33),
    (1215.00, 3.00, 160.00, 53.33),
]
THZ_PER_INV_CM = 0.0299792458
PEAK_GAIN = 0.42


def raman_gain(df_thz):
    nu = np.asarray(df_thz) / THZ_PER_INV_CM
    g = np.zeros_like(nu)
    for pos, amp, gfwhm, lfwhm in MODES:
        sigma = gfwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        gamma = lfwhm / 2.0
        g += amp * (voigt_profile(nu - pos, sigma, gamma) - voigt_profile(nu + pos, sigma, gamma))
    return g


def attenuation(lam_nm):
    lam = np.asarray(lam_nm) / 1000.0
    rayleigh = 0.78 / lam**4
    infrared = 7.81e11 * np.exp(-48.48 / lam)
    oh = 0.05 * np.exp(-0.5 * ((lam_nm - 1383.0) / 12.0) ** 2)
    return rayleigh + 0.035 + infrared + oh


def main():
    df = np.round(np.arange(0.0, 40.0 + 1e-9, 0.1), 6)
    g = raman_gain(df)
    g = np.clip(g / g.max() * PEAK_GAIN, 0.0, None)
    g[0] = 0.0
    with open(DATA / "g652d_raman_gain.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_f_thz", "gain_1_km_w"])
        for x, y in zip(df, g):
            w.writerow([f"{x:.1f}", f"{y:.6f}"])

    lam = np.arange(1380.0, 1640.0 + 1e-9, 1.0)
    a = attenuation(lam)
    with open(DATA / "g652d_attenuation.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["wavelength_nm", "alpha_db_km"])
        for x, y in zip(lam, a):
            w.writerow([f"{x:.1f}", f"{y:.6f}"])


if __name__ == "__main__":
    main()
