"""Feature-set implementations, one module per family."""
