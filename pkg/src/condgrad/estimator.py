"""scikit-learn style classifier wrapping the training loops."""
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.preprocessing import LabelEncoder
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .constraints import ConstraintSpec, Kind, parse_kind
from .network import Batch, incidence_matrix, init_network, predict_proba
from .optim import StepSchedule, path_cg, train_cg, train_pgd, train_sgd


class CGClassifier(ClassifierMixin, BaseEstimator):
    """Feedforward ReLU classifier trained under a norm-ball constraint.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int
        Widths of the hidden layers; ``()`` gives a linear softmax model.
    optimizer : {"cg", "path_cg", "pgd", "sgd"}
    constraint : str or None
        Constraint kind (e.g. ``"FrobeniusBall"``, ``"l1"``); ignored by ``sgd``.
    lam : float
        Radius of the feasible ball.
    eta0, schedule, burn_in
        Step schedule for the conditional-gradient optimizers.
    lr : float
        Step size for ``pgd`` and ``sgd``.
    n_iter, batch_size, random_state
        Iterations, minibatch size (``None`` for full batch) and seed.

    Attributes
    ----------
    classes_ : ndarray
    net_ : FeedForwardNet
    metrics_ : RunMetrics
    """

    def __init__(self, hidden_layer_sizes=(50,), optimizer="cg", constraint="FrobeniusBall",
                 lam=10.0, eta0=0.9, schedule="burn_in_then_decay", burn_in=None, lr=0.1,
                 n_iter=100, batch_size=50, random_state=0):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.optimizer = optimizer
        self.constraint = constraint
        self.lam = lam
        self.eta0 = eta0
        self.schedule = schedule
        self.burn_in = burn_in
        self.lr = lr
        self.n_iter = n_iter
        self.batch_size = batch_size
        self.random_state = random_state

    def fit(self, X, y):
        from .harness.experiment import rescale_into_ball

        X, y = check_X_y(X, y, dtype=np.float64)
        check_classification_targets(y)
        self._encoder = LabelEncoder().fit(y)
        self.classes_ = self._encoder.classes_
        if len(self.classes_) < 2:
            raise ValueError(f"need at least two classes, got 1 class: {self.classes_[0]!r}")
        self.n_features_in_ = X.shape[1]
        train = Batch(X, self._encoder.transform(y))
        seed = 0 if self.random_state is None else int(self.random_state)
        sizes = [X.shape[1], *self.hidden_layer_sizes, len(self.classes_)]
        net = init_network(sizes, seed=seed)
        common = dict(T=self.n_iter, batch_size=self.batch_size, seed=seed)

        if self.optimizer == "sgd":
            self.net_, self.metrics_ = train_sgd(net, train, None, self.lr, **common)
            return self
        if self.constraint is None:
            raise ValueError(f"optimizer {self.optimizer!r} needs a constraint")
        kind = parse_kind(self.constraint)
        aux = incidence_matrix(net) if kind is Kind.TV else None
        spec = ConstraintSpec(kind, self.lam, aux=aux, seed=seed)
        schedule = StepSchedule(self.schedule, self.eta0, self.burn_in)
        if self.optimizer == "cg":
            net = rescale_into_ball(net, spec)
            self.net_, self.metrics_ = train_cg(net, train, None, spec, schedule, **common)
        elif self.optimizer == "path_cg":
            if kind is not Kind.PATH_NORM:
                raise ValueError("path_cg needs constraint='PathNormBall'")
            net = rescale_into_ball(net, spec)
            self.net_, self.metrics_ = path_cg(net, train, None, self.lam, schedule, **common)
        elif self.optimizer == "pgd":
            self.net_, self.metrics_ = train_pgd(net, train, None, spec, self.lr, **common)
        else:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} is expecting "
                f"{self.n_features_in_} features as input"
            )
        return predict_proba(self.net_, X)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]
