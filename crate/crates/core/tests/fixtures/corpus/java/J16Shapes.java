public class J16Shapes {
    interface Shape {
        double area();
    }

    static class Circle implements Shape {
        private final double r;

        Circle(double r) {
            this.r = r;
        }

        public double area() {
            return Math.PI * r * r;
        }
    }

    static class Square implements Shape {
        private final double side;

        Square(double side) {
            this.side = side;
        }

        public double area() {
            return side * side;
        }
    }

    public static void main(String[] args) {
        Shape[] shapes = {new Circle(1.5), new Square(2)};
        double total = 0;
        for (Shape s : shapes) {
            total += s.area();
        }
        System.out.println(total);
    }
}
