def shift_char(ch, k):
    if not ch.isalpha():
        return ch
    base = ord('a') if ch.islower() else ord('A')
    return chr((ord(ch) - base + k) % 26 + base)


def caesar(text, k):
    return ''.join(shift_char(ch, k) for ch in text)


secret = caesar("Hello, World", 3)
print(secret)
print(caesar(secret, -3))
