def fib(n):
    if n < 2:
        return n
    prev, cur = 0, 1
    for _ in range(n - 1):
        prev, cur = cur, prev + cur
    return cur


values = [fib(i) for i in range(10)]
total = sum(values)
print(values)
print(total)
