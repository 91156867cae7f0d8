"""Common estimator interface for every denoiser.

A denoiser maps a batch of noisy windows ``(n_windows, H, 3)`` to denoised
windows of the same shape. ``fit(X, y)`` receives noisy windows ``X`` and
their ground-truth counterparts ``y``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_windows


class BaseDenoiser(BaseEstimator):
    name = "denoiser"

    def _validate(self, X, name="X"):
        return check_windows(X, name)

    def _check_fitted(self, attr):
        check_is_fitted(self, attr)

    def fit(self, X, y=None):
        raise NotImplementedError

    def predict(self, X):
        raise NotImplementedError

    def transform(self, X):
        return self.predict(X)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).predict(X)

    def score(self, X, y):
        """Negative RMSE, so that greater is better as sklearn expects."""
        pred = self.predict(X)
        y = self._validate(y, "y")
        return -float(np.sqrt(np.mean((pred - y) ** 2)))
