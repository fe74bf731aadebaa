"""Small numeric helpers."""
import math


def clamp(value, low, high):
    return max(low, min(value, high))


def distance(a, b):
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def lerp(a, b, t):
    t = clamp(t, 0.0, 1.0)
    return a + (b - a) * t


def _helper(x):
    return x * 2


def scaled(values, factor):
    return [_helper(v) * factor for v in values]
