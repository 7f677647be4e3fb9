public class J04BinarySearch {
    static int search(int[] a, int key) {
        int lo = 0;
        int hi = a.length - 1;
        while (lo <= hi) {
            int mid = (lo + hi) >>> 1;
            if (a[mid] < key) {
                lo = mid + 1;
            } else if (a[mid] > key) {
                hi = mid - 1;
            } else {
                return mid;
            }
        }
        return -(lo + 1);
    }

    public static void main(String[] args) {
        int[] data = {1, 3, 5, 7, 9};
        System.out.println(search(data, 7));
        System.out.println(search(data, 4));
    }
}
