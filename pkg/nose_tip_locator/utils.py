def increment_counter(success, counters):
    if success:
        counters["correct"] += 1
    else:
        counters["failed"] += 1
