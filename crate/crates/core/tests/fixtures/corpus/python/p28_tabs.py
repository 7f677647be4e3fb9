def histogram(values, width):
	lines = []
	top = max(values)
	for v in values:
		bar = '#' * (v * width // top)
		lines.append(bar)
	return lines


for line in histogram([3, 7, 1, 5], 20):
	print(line)
