import contextlib
import io
import json
import logging
import sys

import pytest

from diploid_vortex.logging import (
    RunContext,
    StandardStreamHandler,
    VortexTextFormatter,
    get_logger,
    setup_logging,
    timed_operation,
)


@pytest.fixture
def json_stdout():
    setup_logging(level="DEBUG", format_type="json", output="stdout")
    yield
    setup_logging()


def test_json_records_carry_extra_and_run_context(capsys, json_stdout):
    logger = get_logger("diploid_vortex.solvers", solver="exact")

    with RunContext(command="tau", run_id="abc123"):
        logger.info("Solved", extra={"n_max": 40})
    logger.debug("Outside")

    first, second = (json.loads(line) for line in capsys.readouterr().out.splitlines())
    assert first["message"] == "Solved"
    assert first["level"] == "INFO"
    assert first["run_id"] == "abc123"
    assert first["command"] == "tau"
    assert first["extra"]["n_max"] == 40
    assert first["extra"]["solver"] == "exact"
    assert first["extra"]["service"] == "diploid-vortex"
    assert "run_id" not in second


def test_level_filters_records(capsys):
    setup_logging(level="WARNING", format_type="json", output="stdout")
    try:
        get_logger("diploid_vortex.x").info("hidden")
        get_logger("diploid_vortex.x").warning("shown")
    finally:
        setup_logging()

    lines = capsys.readouterr().out.splitlines()
    assert [json.loads(line)["message"] for line in lines] == ["shown"]


def test_run_ids_are_unique():
    assert RunContext().run_id != RunContext().run_id


def test_text_formatter_includes_extra():
    record = logging.LogRecord("diploid_vortex", logging.INFO, __file__, 1, "hello", (), None)
    record.extra = {"d": 1.5}

    text = VortexTextFormatter(use_colors=False).format(record)

    assert "hello" in text
    assert "d=1.5" in text


def test_timed_operation_logs_success(caplog):
    @timed_operation("double")
    def double(x):
        return 2 * x

    with caplog.at_level(logging.INFO):
        assert double(4) == 8

    record = next(r for r in caplog.records if r.getMessage() == "Completed double")
    assert record.extra["success"] is True
    assert record.extra["duration_ms"] >= 0


def test_timed_operation_logs_and_reraises_failure(caplog):
    @timed_operation("explode")
    def explode():
        raise ArithmeticError("boom")

    with caplog.at_level(logging.INFO), pytest.raises(ArithmeticError):
        explode()

    record = next(r for r in caplog.records if r.getMessage() == "Failed explode")
    assert record.levelname == "ERROR"
    assert record.extra["error"] == "boom"
    assert record.extra["success"] is False


def test_handler_follows_a_replaced_stderr():
    setup_logging(level="INFO", format_type="json")
    buffer = io.StringIO()
    try:
        with contextlib.redirect_stderr(buffer):
            get_logger("diploid_vortex.x").info("redirected")
    finally:
        setup_logging()

    assert json.loads(buffer.getvalue())["message"] == "redirected"


def test_standard_stream_handler_ignores_assignment():
    handler = StandardStreamHandler("stdout")
    handler.stream = io.StringIO()

    assert handler.stream is sys.stdout
