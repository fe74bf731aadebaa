"""Intersections."""


class Node:
    def __init__(self, name, x, y):
        self.name = name
        self.x = x
        self.y = y
        self.inbound = []

    def pos(self):
        return (self.x, self.y)

    def connect(self, link):
        self.inbound.append(link)
        return len(self.inbound)
