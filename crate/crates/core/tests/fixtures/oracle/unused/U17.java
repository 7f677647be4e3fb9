public class Main {
    public static void main(String[] args) {
        double rate = 0.5;
        double base = 10.0;
        double unusedRatio = rate / 2;  // expect: unused
        System.out.println(base * rate);
    }
}
