def clamp(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v

def unused_wrapper(v):  # expect: unused
    return clamp(v, 0, 10)  # expect: unused

print(clamp(15, 0, 10))
