"""One-layer Bi-LSTM sequence classifier with a fully connected head.

The hidden width equals the number of input features; the final forward and
backward hidden states are concatenated and mapped to class logits.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence


class BiLstmClassifier(nn.Module):
    def __init__(self, n_features: int, n_classes: int):
        super().__init__()
        self.n_features = n_features
        self.n_classes = n_classes
        self.lstm = nn.LSTM(
            input_size=n_features,
            hidden_size=n_features,
            num_layers=1,
            batch_first=True,
            bidirectional=True,
        )
        self.head = nn.Linear(2 * n_features, n_classes)

    def forward(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        packed = pack_padded_sequence(
            x, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        _, (hidden, _) = self.lstm(packed)
        feat = torch.cat([hidden[0], hidden[1]], dim=1)
        return self.head(feat)

    @torch.no_grad()
    def probabilities(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.forward(x, lengths), dim=1)
