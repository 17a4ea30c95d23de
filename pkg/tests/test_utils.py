import logging
import logging.handlers

import pytest

from rtepinn.utils.config_manager import ConfigManager, get_config, load_config
from rtepinn.utils.errors import (ConfigError, InvalidArgumentError, NumericalFailure,
                                  RtePinnError, TapeError, check_finite)
from rtepinn.utils.logger import RtLogger, get_logger, setup_logging


class TestErrors:
    @pytest.mark.parametrize("error, code", [(InvalidArgumentError("x"), 1),
                                             (TapeError("x"), 1),
                                             (ConfigError("x"), 2),
                                             (NumericalFailure("x"), 3)])
    def test_exit_codes(self, error, code):
        assert isinstance(error, RtePinnError)
        assert error.exit_code == code

    def test_builtin_bases(self):
        assert isinstance(InvalidArgumentError("x"), ValueError)
        assert isinstance(NumericalFailure("x"), ArithmeticError)

    def test_failure_message_carries_context(self):
        error = NumericalFailure("diverged", iteration=12, residual=0.5, phase="adam")
        assert str(error) == "diverged | phase=adam | iteration=12 | residual=5.000e-01"
        assert str(NumericalFailure("plain")) == "plain"

    def test_check_finite(self):
        assert check_finite(1.5, "loss") == 1.5
        for bad in (float("nan"), float("inf"), float("-inf")):
            with pytest.raises(NumericalFailure) as info:
                check_finite(bad, "loss", iteration=3, phase="lbfgs")
            assert info.value.iteration == 3


class TestLogger:
    @pytest.mark.parametrize("text, size", [("10MB", 10 * 1024 ** 2), ("5kb", 5 * 1024),
                                            ("1GB", 1024 ** 3), ("2048", 2048)])
    def test_parse_size(self, text, size):
        assert RtLogger._parse_size(text) == size

    def test_file_handler_rotates(self, tmp_path):
        path = tmp_path / "logs" / "run.log"
        logger = RtLogger("rtepinn-test", str(path), level="DEBUG", max_size="1KB")
        logger.log_training_event("adam", 10, 0.5, grad_norm=1e-3, lr=1e-3)
        logger.log_solver_event("fdm-1d", "direct density solve", "n_x=200")
        for handler in logger.logger.handlers:
            handler.flush()
        text = path.read_text()
        assert "Train [adam] it=10 loss=5.000000e-01 grad_norm=1.000e-03" in text
        assert "Solver [fdm-1d] direct density solve | n_x=200" in text
        assert any(isinstance(h, logging.handlers.RotatingFileHandler)
                   for h in logger.logger.handlers)

    def test_setup_replaces_the_global_logger(self):
        logger = setup_logging(level="WARNING")
        assert get_logger() is logger
        assert logger.logger.level == logging.WARNING


class TestConfigManager:
    def test_defaults_without_a_file(self):
        manager = ConfigManager()
        assert manager.get('training', 'adam_lr') == 1e-3
        assert manager.get('training', 'missing', 7) == 7
        assert manager.validate_config()['valid']

    def test_file_layers_over_defaults(self, tmp_path):
        path = tmp_path / "custom.toml"
        path.write_text("[training]\nadam_lr = 0.5\n\n[extra]\nflag = true\n")
        manager = ConfigManager(str(path))
        assert manager.get('training', 'adam_lr') == 0.5
        assert manager.get('training', 'lbfgs_memory') == 10
        assert manager.get('extra', 'flag') is True
        assert manager.validate_config()['warnings']

    def test_directory_prefers_development(self, tmp_path):
        (tmp_path / "development.toml").write_text("[network]\nn_width = 12\n")
        (tmp_path / "production.toml").write_text("[network]\nn_width = 99\n")
        assert ConfigManager(str(tmp_path)).get('network', 'n_width') == 12

    def test_invalid_values_are_reported(self):
        manager = ConfigManager()
        manager.set('collocation', 'n_x', 0)
        manager.set('training', 'adam_lr', -1.0)
        report = manager.validate_config()
        assert not report['valid']
        assert len(report['issues']) == 2

    def test_broken_file_raises(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[training\n")
        with pytest.raises(ConfigError):
            ConfigManager(str(path))

    def test_save_round_trip(self, tmp_path):
        manager = ConfigManager()
        manager.set('fdm', 'n_x', 321)
        path = tmp_path / "saved.toml"
        manager.save_config(str(path))
        assert ConfigManager(str(path)).get('fdm', 'n_x') == 321

    def test_shipped_development_config(self):
        assert load_config("development")['fdm']['direct_limit'] == 100000
        assert get_config().get('halfspace', 'output_margin') == 1.2
        with pytest.raises(ConfigError):
            load_config("staging")
