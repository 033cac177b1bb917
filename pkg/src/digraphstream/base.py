"""Estimator plumbing so the streaming algorithms compose with scikit-learn.

``fit(X)`` consumes one stream (an :class:`EdgeStream`, or a graph that
is wrapped in a stream with the order policy the algorithm's model needs)
and stores results in trailing-underscore attributes. ``fit_predict``
returns the primary result, as clusterers do.
"""

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted


class StreamEstimator(BaseEstimator):
    #: attribute returned by fit_predict
    _result_attr = "ordering_"

    def fit_predict(self, X, y=None):
        return self.fit(X, y)._result()

    def _result(self):
        check_is_fitted(self, self._result_attr)
        return getattr(self, self._result_attr)

    def _store(self, result):
        for key, value in result.as_attributes().items():
            setattr(self, key, value)
        return self

    def __sklearn_is_fitted__(self):
        return hasattr(self, self._result_attr)
