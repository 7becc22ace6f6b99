def compute(data):
    return sum(data)
