def solve(symbols):
        total = 1
    return total
