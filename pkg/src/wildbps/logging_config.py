import logging.config
import logging.handlers
import yaml
import os

CONFIG_PATH = os.path.join(os.path.dirname(__file__), 'logger_config.yaml')


def setup_logging():
    with open(CONFIG_PATH, 'r') as f:
        config = yaml.safe_load(f)
    # 文件 handler 需要目录先存在
    for handler in config.get("handlers", {}).values():
        filename = handler.get("filename")
        if filename:
            os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
    level = os.environ.get("WILDBPS_LOG_LEVEL")
    if level:
        config["root"]["level"] = level.upper()
    logging.config.dictConfig(config)
