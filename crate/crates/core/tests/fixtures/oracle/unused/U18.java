import java.util.Arrays;

public class Main {
    public static void main(String[] args) {
        int[] xs = {3, 1, 2};
        int[] copy = new int[3];  // expect: unused
        Arrays.sort(xs);
        System.out.println(xs[0]);
    }
}
