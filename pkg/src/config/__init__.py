from .settings import Settings, get_settings, log_run_event, new_run_id, run_timestamp

__all__ = ["Settings", "get_settings", "log_run_event", "new_run_id", "run_timestamp"]
