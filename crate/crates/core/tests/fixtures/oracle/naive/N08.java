public class Main {
    public static void main(String[] args) {
        int i = 0;
        while (false) {  // expect: unreachable
            i++;  // expect: unreachable
        }
        System.out.println(i);
    }
}
