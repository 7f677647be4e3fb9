def to_fahrenheit(celsius):
    return celsius * 9 / 5 + 32


readings = [12.5, 17.0, 21.25, 9.75]
converted = []
for c in readings:
    f = to_fahrenheit(c)
    converted.append(round(f, 1))
warmest = max(converted)
print(converted)
print("warmest:", warmest)
