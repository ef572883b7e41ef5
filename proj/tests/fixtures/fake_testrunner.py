#!/usr/bin/env python3
"""Test double for the line-protocol test runner.

Executes the solution and test code in one fresh namespace per request and
calls every top-level test_* function. There is no isolation: use it only
with trusted fixture code.
"""
import json
import signal
import sys
import time


class _Timeout(Exception):
    pass


def _alarm(signum, frame):
    raise _Timeout()


def run(request):
    started = time.monotonic()
    namespace = {"__name__": "solution"}
    per_test = []
    errored = False
    timed_out = False
    signal.signal(signal.SIGALRM, _alarm)
    signal.setitimer(signal.ITIMER_REAL, float(request.get("timeout_seconds", 10)))
    try:
        exec(compile(request["solution_code"], "<solution>", "exec"), namespace)
        exec(compile(request["test_code"], "<tests>", "exec"), namespace)
        tests = sorted(k for k, v in namespace.items() if k.startswith("test_") and callable(v))
        for name in tests:
            try:
                namespace[name]()
                per_test.append({"name": name, "passed": True, "message": ""})
            except _Timeout:
                raise
            except Exception as exc:  # a failing test is data, not an error
                per_test.append({"name": name, "passed": False, "message": repr(exc)})
    except _Timeout:
        timed_out = True
    except Exception:
        errored = True
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
    return {
        "id": request["id"],
        "total_tests": len(per_test),
        "passed": sum(t["passed"] for t in per_test),
        "errored": errored,
        "timed_out": timed_out,
        "per_test": per_test,
        "duration_seconds": time.monotonic() - started,
    }


def main():
    out = sys.stdout
    print(json.dumps({"protocol": "codequal-testrunner", "version": 1}), file=out, flush=True)
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            response = run(request)
        except (ValueError, KeyError, TypeError) as exc:
            response = {"id": "unknown", "error": f"malformed request: {exc}"}
        print(json.dumps(response), file=out, flush=True)


if __name__ == "__main__":
    main()
