import os
import threading
import time
import unittest

from nkverify.verify.suites import run_immersion_report, run_structure_suite
from nkverify.verify.types import RunConfig


class TestParallelization(unittest.TestCase):
    samples = None
    failures = 0

    @classmethod
    def setUpClass(cls):
        os.environ.pop("NKVERIFY_THREADS", None)
        cls.samples = int(os.environ.get("NKVERIFY_PERF_SAMPLES", "20000"))

    def timed(self, runner, *args):
        start = time.perf_counter()
        report = runner(*args)
        return report, time.perf_counter() - start

    def test_structure_suite_is_thread_independent(self):
        single, single_s = self.timed(run_structure_suite, RunConfig(seed=7, samples=self.samples, threads=1))
        several, several_s = self.timed(run_structure_suite, RunConfig(seed=7, samples=self.samples, threads=4))
        print(f"structure suite: {single_s:.2f}s on 1 thread, {several_s:.2f}s on 4")

        self.assertTrue(single.passed)
        self.assertEqual(single.to_json(), several.to_json())

    def test_immersion_report_is_thread_independent(self):
        single = run_immersion_report("f8", RunConfig(seed=7, samples=8, threads=1))
        several = run_immersion_report("f8", RunConfig(seed=7, samples=8, threads=4))
        self.assertEqual(single.to_json(), several.to_json())

    def concurrent_suite(self, expected):
        report = run_structure_suite(RunConfig(seed=3, samples=2000, threads=2))
        if report.to_json() == expected:
            self.failures -= 1

    def test_concurrent_runs(self):
        expected = run_structure_suite(RunConfig(seed=3, samples=2000, threads=1)).to_json()
        threads = []
        test_count = 3
        self.failures = test_count

        for i in range(test_count):
            t = threading.Thread(target=self.concurrent_suite, args=(expected,))
            threads.append(t)
            t.start()

        for t in threads:
            t.join()

        self.assertEqual(0, self.failures)


if __name__ == "__main__":
    unittest.util._MAX_LENGTH = 300
    unittest.main()
