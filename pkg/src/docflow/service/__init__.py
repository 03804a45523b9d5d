from docflow.service.app import ServiceConfig, create_app, default_llm_config

__all__ = ["ServiceConfig", "create_app", "default_llm_config"]
