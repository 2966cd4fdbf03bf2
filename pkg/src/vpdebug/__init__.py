"""Visual-program execution, feedback, error injection and critic-refiner debugging."""

__version__ = "0.1.0"
