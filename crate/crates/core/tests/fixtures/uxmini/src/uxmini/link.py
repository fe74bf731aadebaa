"""Road links between nodes."""
from uxmini.util import clamp, lerp


class Link:
    def __init__(self, start, end, length):
        self.start = start
        self.end = end
        self.length = length
        end.connect(self)

    def point_at(self, progress):
        p = clamp(progress, 0.0, 1.0)
        sx, sy = self.start.pos()
        ex, ey = self.end.pos()
        return (lerp(sx, ex, p), lerp(sy, ey, p))

    def travel_time(self, speed):
        if speed <= 0:
            raise ValueError("speed must be positive")
        return self.length / clamp(speed, 0.1, 100.0)
