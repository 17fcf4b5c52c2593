"""Numpy implementation of the pointwise kernels (fallback backend)."""
import numpy as np

NAME = "numpy"


def predprey(u, v, a, b, c, fu, fv):
    au = a * u
    h = au / (1.0 + au)
    vh = v * h
    np.subtract(u * (1.0 - u), vh, out=fu)
    np.subtract(b * vh, c * v, out=fv)


def fisher(u, r, k, out):
    np.multiply(r * u, 1.0 - u / k, out=out)


def lincomb(e, x, w, f, out):
    np.multiply(e, x, out=out)
    np.add(out, w * f, out=out)


def correct(base, q, f1, f0, out):
    np.add(base, q * (f1 - f0), out=out)
