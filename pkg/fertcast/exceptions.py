class FertcastException(Exception):
    def __init__(self, message, exit_code=1):
        super().__init__(message)

        self.exit_code = exit_code
        self.message = message


class FertcastValidationException(FertcastException):
    def __init__(self, message, details):
        super().__init__(message)

        self.details = details


class DegenerateSeriesException(FertcastException):
    def __init__(self, name, message=None):
        super().__init__(message or f"Series '{name}' is degenerate (constant)")

        self.name = name


class RegionMismatchException(FertcastException):
    def __init__(self, message, difference):
        super().__init__(f"{message}: {sorted(difference)}")

        self.difference = set(difference)


class DuplicateTermException(FertcastException):
    def __init__(self, term):
        super().__init__(f"Duplicated term '{term}'")

        self.term = term


class SingularDesignException(FertcastException):
    def __init__(self, dependent_columns):
        super().__init__(
            f"Design matrix is rank deficient. Dependent columns: {dependent_columns}"
        )

        self.dependent_columns = list(dependent_columns)


class ConvergenceException(FertcastException):
    def __init__(self, sweeps, last_change, lambda_value):
        super().__init__(
            f"Coordinate descent did not converge after {sweeps} sweeps "
            f"(lambda {lambda_value!r}, last max change {last_change!r})"
        )

        self.sweeps = sweeps
        self.last_change = last_change
        self.lambda_value = lambda_value


class FoldFitException(FertcastException):
    def __init__(self, region, cause):
        super().__init__(f"Fit failed on fold holding out '{region}': {cause}")

        self.region = region
        self.cause = cause


class IncompleteYearException(FertcastException):
    def __init__(self, term, year, missing_months):
        super().__init__(
            f"Term '{term}' has an incomplete year {year}. Missing months: {missing_months}"
        )

        self.term = term
        self.year = year
        self.missing_months = list(missing_months)


class RescaleException(FertcastException):
    pass


class DataFormatException(FertcastException):
    def __init__(self, path, message, line=None):
        location = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{location}: {message}")

        self.path = path
        self.line = line


class StageException(FertcastException):
    def __init__(self, stage, variable, cause):
        super().__init__(f"Stage '{stage}' failed for '{variable}': {cause}")

        self.stage = stage
        self.variable = variable
        self.cause = cause
