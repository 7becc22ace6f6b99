def solve(symbols):
    ...
