class DivisionByZero(ZeroDivisionError):
    """A divisor vanished, either identically or at an evaluation point.

    ``subexpr`` names the offending denominator when one is known.
    """

    def __init__(self, message: str, subexpr=None):
        super().__init__(message)
        self.subexpr = subexpr


class ExpansionTooLarge(ArithmeticError):
    """Exact numerator expansion exceeded the configured term budget."""

    def __init__(self, nterms: int, budget: int):
        super().__init__(f"numerator has {nterms} terms, budget is {budget}")
        self.nterms = nterms
        self.budget = budget
