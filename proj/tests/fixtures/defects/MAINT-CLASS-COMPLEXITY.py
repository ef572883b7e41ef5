"""Feature gate."""

__all__ = ["Gate"]


class Gate:
    """Rollout switch."""

    def enabled(self, f: list) -> bool:
        """True when every flag is set."""
        return (f[0] and f[1] and f[2] and f[3] and f[4] and f[5] and f[6] and f[7] and f[8] and f[9]
                and f[10] and f[11] and f[12] and f[13] and f[14] and f[15] and f[16] and f[17] and f[18]
                and f[19] and f[20])
