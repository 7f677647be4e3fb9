inventory = {'apple': 3, 'pear': 0, 'plum': 7}
restock = ['pear', 'kiwi']

for item in restock:
    inventory[item] = inventory.get(item, 0) + 5

in_stock = [name for name, qty in inventory.items() if qty > 0]
in_stock.sort()
print(in_stock)
print(sum(inventory.values()))
