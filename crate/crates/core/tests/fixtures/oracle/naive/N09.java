public class Main {
    static void fail(String m) {
        throw new IllegalStateException(m);
        System.out.println(m);  // expect: unreachable
    }

    public static void main(String[] args) {
        System.out.println("ok");
    }
}
