def helper(x):  # expect: unused
    return x + 1  # expect: unused

def total(xs):
    s = 0
    for x in xs:
        s += x
    return s

print(total([1, 2, 3]))
