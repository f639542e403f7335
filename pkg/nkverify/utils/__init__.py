from nkverify.utils.config import Config

config = Config()


def get_config():
    return config
