import json

from numerics.NumericsError import ConfigError, FileError, UnidentError
from systems.LtiSystem import LtiSystem


class Workflow:
    exit_code = 0

    def __init__(self, logger, config):
        self.logger = logger
        self.config = config

    def execute(self):
        try:
            self.logger.info(
                "Starting workflow",
                extra={
                    "json": self.config.summary()
                })
            return self.run()
        except UnidentError as e:
            self._log_failure(e)
            raise
        except OSError as e:
            error = FileError(f"Unable to access {e.filename or 'a file'}: {e.strerror or e}")
            self._log_failure(error)
            raise error from e

    def _log_failure(self, error):
        self.logger.error(
            "Workflow failed",
            extra={
                "json": {
                    "error_code": error.code,
                    "error_description": error.message
                }
            })

    def run(self):
        raise NotImplementedError("Subclasses must implement the 'run' method")

    def load_system(self):
        if not self.config.system:
            raise ConfigError(f"{self.config.command} needs --system")
        return LtiSystem.from_json(self.config.system)

    def emit(self, text):
        if self.config.output:
            with open(self.config.output, 'w') as fh:
                fh.write(text)
            return ''
        return text

    def emit_json(self, payload):
        return self.emit(json.dumps(payload, indent=2) + '\n')
