import pytest

from gaussep.suite import CASES, run_case, run_suite

CHEAP = ['mean_identity', 'symplectic_vs_ordinary', 'isotropic_threshold', 'williamson_roundtrip']


class TestSuite:
    def test_cheap_cases_pass(self):
        report = run_suite(seed=0, scale=0.01, cases=CHEAP)
        assert [case.name for case in report.cases] == CHEAP
        assert report.passed, report.to_json()

    def test_workers_do_not_change_the_result(self):
        serial = run_suite(seed=3, scale=0.01, cases=CHEAP)
        threaded = run_suite(seed=3, scale=0.01, workers=4, cases=CHEAP)
        for a, b in zip(serial.cases, threaded.cases):
            assert (a.samples, a.failures, a.skipped) == (b.samples, b.failures, b.skipped)

    def test_sample_counts_follow_scale(self):
        report = run_suite(seed=0, scale=0.002, cases=['symplectic_vs_ordinary', 'mean_identity'])
        assert [case.samples for case in report.cases] == [20, 2]

    def test_unknown_case(self):
        with pytest.raises(KeyError):
            run_suite(cases=['no_such_case'])

    @pytest.mark.parametrize("name", ['localization', 'pt_invariant',
                                      'passive_orbits', 'heisenberg_biconditional',
                                      'certificate_soundness'])
    def test_single_samples(self, name):
        result = run_case(name, seed=11, count=2)
        assert result.passed, result.failures

    @pytest.mark.slow
    @pytest.mark.parametrize("name", list(CASES))
    def test_full_case(self, name):
        report = run_suite(seed=0, scale=1.0, cases=[name])
        assert report.passed, report.to_json()
