import re

CRITERIA = {
    1: "reference contingency tables reproduce the quoted distances",
    2: "random pairs: approx <= exact, equality condition, brute-force agreement",
    3: "equal-cell tables attain 1 - m*k/n00 exactly under both metrics",
    4: "well-separated data: independent k-means runs agree exactly",
    5: "block marginal matches quadrature; predictive matches Monte Carlo",
    6: "sampler recovers the five-component design: k mode and central clustering",
    7: "small-trace summaries match brute-force enumeration",
    8: "bimodal trace: two modes and a calibrated region",
    9: "k-means solution outside the unconditional region, inside its own-k region",
    10: "every subcommand replayed from its manifest reproduces outputs exactly",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            when = getattr(rep, "when", "call")
            if status == "passed" and when != "call":
                continue
            match = re.search(r"test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if match:
                num = int(match.group(1))
                if status in ("failed", "error"):
                    outcomes[num] = "FAIL"
                else:
                    outcomes.setdefault(num, "PASS")
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(outcomes):
        label = CRITERIA.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d} {outcomes[num]}: {label}")
