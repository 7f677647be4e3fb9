def greet(name):
    msg = "hello " + name
    tmp = msg.upper()  # expect: unused
    return msg

print(greet("ada"))
