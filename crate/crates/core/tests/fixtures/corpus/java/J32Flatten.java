import java.util.ArrayList;
import java.util.List;

public class J32Flatten {
    static void flatten(Object node, List<Integer> out) {
        if (node instanceof Integer) {
            out.add((Integer) node);
        } else if (node instanceof Object[]) {
            for (Object child : (Object[]) node) {
                flatten(child, out);
            }
        }
    }

    public static void main(String[] args) {
        Object tree = new Object[] {1, new Object[] {2, new Object[] {3, 4}}, 5};
        List<Integer> flat = new ArrayList<>();
        flatten(tree, flat);
        System.out.println(flat);
    }
}
