total = 0
for i in range(3):
    total += i
if total > 100:
    print("unreachable")
else:
    print("total", total)
