public class J21Switch {
    static String dayName(int d) {
        String name;
        switch (d) {
            case 1:
                name = "Mon";
                break;
            case 2:
                name = "Tue";
                break;
            default:
                name = "Other";
                break;
        }
        return name;
    }

    public static void main(String[] args) {
        for (int d = 1; d <= 3; d++) {
            System.out.println(dayName(d));
        }
    }
}
