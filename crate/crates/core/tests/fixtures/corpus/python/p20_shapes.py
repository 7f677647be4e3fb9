import math


class Circle:
    def __init__(self, r):
        self.r = r

    def area(self):
        return math.pi * self.r * self.r


class Square:
    def __init__(self, side):
        self.side = side

    def area(self):
        return self.side * self.side


shapes = [Circle(1.5), Square(2), Circle(0.5)]
areas = sorted(round(s.area(), 2) for s in shapes)
print(areas)
