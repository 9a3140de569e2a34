print("loading data")
raise ValueError("shape mismatch in layer 2")
