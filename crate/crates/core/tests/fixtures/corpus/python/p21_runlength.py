def encode(s):
    if not s:
        return ''
    out = []
    run_char = s[0]
    run_len = 1
    for ch in s[1:]:
        if ch == run_char:
            run_len += 1
        else:
            out.append(f"{run_len}{run_char}")
            run_char = ch
            run_len = 1
    out.append(f"{run_len}{run_char}")
    return ''.join(out)


print(encode("aaabccdddd"))
