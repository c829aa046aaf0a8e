"""
dyadicwalsh.report
==================

Result objects returned by the check operations and the verification
suites. Failed checks are reported through these objects, never raised.
"""

PASSED = 'passed'
FAILED = 'failed'
SKIPPED = 'skipped'


class CheckReport:
    """Outcome of a single check.

    Attributes:
    -----------

    name: str
        Name of the check.

    status: str
        One of "passed", "failed" or "skipped". A check is skipped when its
        precondition does not hold.

    details: dict
        Check specific values, e.g. the rank w of a zero-sum check.

    failures: list
        The inputs on which the checked identity did not hold.

    records: list of dict
        Tabular output of the check, if any.
    """

    def __init__(self, name, status, details=None, failures=None, records=None):
        if status not in (PASSED, FAILED, SKIPPED):
            raise ValueError(f'Unknown status: {status}')
        self.name = name
        self.status = status
        self.details = details or {}
        self.failures = failures or []
        self.records = records or []

    @classmethod
    def from_failures(cls, name, failures, details=None, records=None):
        return cls(name, FAILED if failures else PASSED, details, failures, records)

    @property
    def passed(self):
        return self.status == PASSED

    def to_json(self):
        return {'name': self.name,
                'status': self.status,
                'details': self.details,
                'failures': [repr(f) for f in self.failures[:20]],
                'failure_count': len(self.failures)}

    def __repr__(self):
        return f"<CheckReport '{self.name}'\n\tstatus={self.status}\n\tfailures={len(self.failures)}>"

    def __str__(self):
        return self.__repr__()


class SuiteResult:
    """Outcome of one verification suite: a list of `CheckReport`s."""

    def __init__(self, name, reports, elapsed):
        self.name = name
        self.reports = list(reports)
        self.elapsed = elapsed

    @property
    def passed(self):
        return all(r.status != FAILED for r in self.reports)

    @property
    def status(self):
        return PASSED if self.passed else FAILED

    def to_json(self):
        return {'suite': self.name,
                'status': self.status,
                'checks': [r.to_json() for r in self.reports]}

    def __repr__(self):
        return f"<SuiteResult '{self.name}'\n\tstatus={self.status}\n\tchecks={len(self.reports)}>"

    def __str__(self):
        return self.__repr__()
