public class J31Tabs {
	static int[] histogram(int[] values, int buckets) {
		int[] counts = new int[buckets];
		for (int v : values) {
			int b = Math.min(v * buckets / 100, buckets - 1);
			counts[b]++;
		}
		return counts;
	}

	public static void main(String[] args) {
		int[] h = histogram(new int[] {5, 15, 55, 95, 99}, 4);
		for (int c : h) {
			System.out.println(c);
		}
	}
}
