import pytest

from penciltrace.weylop import defect_norm, defect_study


@pytest.mark.slow
def test_calibrated_truncation_reaches_fourth_order():
    study = defect_study()
    # with the sign-calibrated correction the defect drops at ~4th order
    # (observed order = least-squares slope of log defect vs log hbar)
    assert study.slope_calibrated >= 3.5
    # the uncalibrated (as-printed) combination stays near 2nd order
    assert study.slope_plain < 3.0
    # and the calibrated defects are strictly smaller throughout
    for c, p in zip(study.defects_calibrated, study.defects_plain):
        assert c < p


def test_defect_norm_guard():
    with pytest.raises(ValueError):
        defect_norm(0.2, -1.0, z=1.0)
