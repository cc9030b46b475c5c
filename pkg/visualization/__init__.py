from .panels import attention_panels, comparison_chart, sequence_strip, upsampled_attention

__all__ = ["attention_panels", "comparison_chart", "sequence_strip", "upsampled_attention"]
