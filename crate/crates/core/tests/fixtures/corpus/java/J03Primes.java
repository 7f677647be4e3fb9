import java.util.ArrayList;
import java.util.List;

public class J03Primes {
    static List<Integer> sieve(int limit) {
        boolean[] composite = new boolean[limit + 1];
        List<Integer> primes = new ArrayList<>();
        for (int i = 2; i <= limit; i++) {
            if (!composite[i]) {
                primes.add(i);
                for (int j = i * i; j <= limit; j += i) {
                    composite[j] = true;
                }
            }
        }
        return primes;
    }

    public static void main(String[] args) {
        List<Integer> ps = sieve(50);
        System.out.println(ps.size() + " " + ps.get(ps.size() - 1));
    }
}
