"""Minimal traffic simulation used as an analysis fixture."""
from uxmini.world import World
from uxmini.util import clamp

__all__ = ["World", "clamp", "run_demo"]


def run_demo(steps=10):
    w = World("demo")
    w.build_grid(1)
    w.simulate(steps)
    return w.summary()
