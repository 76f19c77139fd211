from .verify_pipeline import VerifyPipeline, run_verify

__all__ = ['VerifyPipeline', 'run_verify']
