# src/commands/verify.py
from src.commands.command_result import CommandResult
from src.cr_determinant.models.run_config import RunConfig
from src.cr_determinant.services.verification_service import SUITE_ORDER, VerificationService
from exceptions import ConfigException


class VerifyCommand:
    """Run the verification suites and report one PASS/FAIL line each"""

    def __init__(self, run_config: RunConfig, verification_service: VerificationService = None):
        self.run = run_config
        self.verification = verification_service or VerificationService()

    def execute(self, args=None) -> CommandResult:
        only = None
        if getattr(args, "suite", None):
            only = [name.strip() for name in args.suite.split(",") if name.strip()]
            unknown = [name for name in only if name not in SUITE_ORDER]
            if unknown:
                raise ConfigException(f"Unknown suites {unknown}; choose from {list(SUITE_ORDER)}")

        suites = self.verification.run_all(self.run, only)
        lines = [suite.summary_line() for suite in suites]
        failed = [suite.name for suite in suites if not suite.passed]
        lines.append(f"{len(suites) - len(failed)}/{len(suites)} suites passed")

        if "schema" in failed:
            exit_code = 2
        elif failed:
            exit_code = 3
        else:
            exit_code = 0
        results = {"suites": [suite.to_dict() for suite in suites], "all_passed": not failed}
        return CommandResult(results, lines, exit_code=exit_code)
