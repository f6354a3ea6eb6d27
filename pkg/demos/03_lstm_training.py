"""
Training a stacked LSTM in numpy
================================

Window a series, fit a small network with Adam and check it on held-out data.
Then forecast beyond the end of the series by feeding predictions back in.
"""

import numpy as np

from co2lstm import TrainConfig, evaluate, init_model, make_supervised, predict, predict_horizon, train
from co2lstm.preprocess import train_test_split

###############################################################################
# A noiseless sine on a rising trend, already in [0, 1].

t = np.arange(600)
raw = np.sin(2 * np.pi * t / 50) + 2 * t / 1000
series = (raw - raw.min()) / (raw.max() - raw.min())

###############################################################################
# 30-day windows predict the next day; the first 80% of windows train.

train_set, test_set = train_test_split(make_supervised(series, 30), 0.8)
print(len(train_set), "training windows,", len(test_set), "test windows")

###############################################################################
# Two layers of 16 keep this quick. The published setup is 3 x 50.

model = init_model((16, 16), seq_len=30, dropout=0.1, seed=0)
print(model.n_parameters(), "parameters")
model, history = train(model, train_set, TrainConfig(batch_size=16, epochs=30, lr=3e-3, seed=0))
print("loss", history.train_loss[0], "->", history.train_loss[-1])

###############################################################################
# Held-out metrics.

report = evaluate(test_set.targets, predict(model, test_set.inputs))
print(report)

###############################################################################
# Closed-loop forecast for 20 steps after the last window.

future = predict_horizon(model, series[-30:], 20)
print(np.round(future, 3))
