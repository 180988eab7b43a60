"""Regenerates the test fixtures in this directory.

Trains three tiny classifiers with PyTorch on synthetic data, exports them
(pre-softmax) in the seqstar model format, writes held-out datasets as JSON
lines, and records float64 PyTorch logits for every dataset sequence in
golden_forward.json so the Rust forward pass can be checked against an
independent implementation.

    python3 fixtures/generate.py
"""

import json
from pathlib import Path

import numpy as np
import torch
from torch import nn

HERE = Path(__file__).resolve().parent


def rounded(a, digits=6):
    return np.round(np.asarray(a, dtype=np.float64), digits).tolist()


# ---------------------------------------------------------------- datasets


def noise_signal(rng, color, n):
    white = rng.standard_normal(n)
    if color == "white":
        return white
    if color == "brown":
        x = np.cumsum(white)
        return x - np.linspace(x[0], x[-1], n)
    spectrum = np.fft.rfft(rng.standard_normal(n))
    f = np.arange(spectrum.size)
    f[0] = 1
    return np.fft.irfft(spectrum / np.sqrt(f), n)


def spectral_features(signal, frames):
    """Centroid (fraction of Nyquist) and log-log slope per frame."""
    out = []
    for chunk in np.array_split(signal, frames):
        power = np.abs(np.fft.rfft(chunk * np.hanning(chunk.size)))[1:] ** 2 + 1e-12
        freqs = np.arange(1, power.size + 1) / power.size
        centroid = float((freqs * power).sum() / power.sum())
        slope = float(np.polyfit(np.log(freqs), np.log(power), 1)[0])
        out.append([centroid, -slope / 2.0])
    return np.array(out).T


def noise_dataset(rng, per_class, steps=6, frame=128):
    xs, ys = [], []
    for label, color in enumerate(["white", "brown", "pink"]):
        for _ in range(per_class):
            xs.append(spectral_features(noise_signal(rng, color, steps * frame), steps))
            ys.append(label)
    return np.array(xs), np.array(ys)


def vowel_dataset(rng, per_class, steps=7, features=3):
    """Formant-like trajectories: class-specific levels and drifts."""
    levels = np.array([[1.0, 2.0, 3.0], [1.6, 1.4, 2.6], [0.8, 2.6, 2.2]])
    drifts = np.array([[0.10, -0.05, 0.0], [-0.08, 0.05, 0.04], [0.0, -0.10, 0.08]])
    t = np.arange(steps)
    xs, ys = [], []
    for label in range(3):
        for _ in range(per_class):
            base = levels[label][:, None] + drifts[label][:, None] * t[None, :]
            xs.append(base + 0.12 * rng.standard_normal((features, steps)))
            ys.append(label)
    return np.array(xs), np.array(ys)


def blob_dataset(rng, per_class, steps=3):
    centers = np.array([[2.0, 1.0], [1.0, 2.0], [2.2, 2.4]])
    xs, ys = [], []
    for label, c in enumerate(centers):
        for _ in range(per_class):
            xs.append(c[:, None] + 0.25 * rng.standard_normal((2, steps)))
            ys.append(label)
    return np.array(xs), np.array(ys)


# ---------------------------------------------------------------- models


class LstmNet(nn.Module):
    def __init__(self, features, hidden, classes):
        super().__init__()
        self.lstm = nn.LSTM(features, hidden, batch_first=True)
        self.fc = nn.Linear(hidden, classes)

    def forward(self, x):  # x: batch × features × steps
        h, _ = self.lstm(x.transpose(1, 2))
        return self.fc(h[:, -1])


class CnnLstmNet(nn.Module):
    def __init__(self, features, channels, hidden, classes):
        super().__init__()
        self.conv = nn.Conv1d(features, channels, kernel_size=3, padding=1)
        self.lstm = nn.LSTM(channels, hidden, batch_first=True)
        self.fc = nn.Linear(hidden, classes)

    def forward(self, x):
        z = torch.relu(self.conv(x))
        h, _ = self.lstm(z.transpose(1, 2))
        return self.fc(h[:, -1])


class FcNet(nn.Module):
    def __init__(self, features, hidden, classes):
        super().__init__()
        self.fc1 = nn.Linear(features, hidden)
        self.fc2 = nn.Linear(hidden, classes)

    def forward(self, x):  # acts on the last step
        return self.fc2(torch.relu(self.fc1(x[:, :, -1])))


def train(model, x, y, epochs=600, lr=0.03):
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    xt, yt = torch.tensor(x, dtype=torch.float32), torch.tensor(y)
    for _ in range(epochs):
        opt.zero_grad()
        loss = nn.functional.cross_entropy(model(xt), yt)
        loss.backward()
        opt.step()
    return model


def accuracy(model, x, y):
    with torch.no_grad():
        pred = model(torch.tensor(x, dtype=model_dtype(model))).argmax(1).numpy()
    return float((pred == y).mean())


def model_dtype(model):
    return next(model.parameters()).dtype


# ---------------------------------------------------------------- export


def lstm_layer(lstm):
    h = lstm.hidden_size
    w, r = lstm.weight_ih_l0.detach(), lstm.weight_hh_l0.detach()
    b = (lstm.bias_ih_l0 + lstm.bias_hh_l0).detach()
    layer = {"kind": "lstm"}
    for k, gate in enumerate("ifgo"):
        layer[f"W_{gate}"] = w[k * h:(k + 1) * h].tolist()
        layer[f"R_{gate}"] = r[k * h:(k + 1) * h].tolist()
        layer[f"b_{gate}"] = b[k * h:(k + 1) * h].tolist()
    layer["output_mode"] = "last"
    return layer


def fc_layer(fc):
    return {"kind": "fully_connected", "W": fc.weight.detach().tolist(), "b": fc.bias.detach().tolist()}


def conv_layer(conv):
    return {
        "kind": "conv1d",
        "weights": conv.weight.detach().tolist(),
        "bias": conv.bias.detach().tolist(),
        "stride": conv.stride[0],
        "padding": conv.padding[0],
        "dilation": conv.dilation[0],
    }


def export(name, model, layers, features, labels, x_test, y_test, golden):
    model = model.double()
    with torch.no_grad():
        logits = model(torch.tensor(x_test, dtype=torch.float64)).numpy()
    doc = {"name": name, "input_features": features, "output_dim": len(labels), "labels": labels, "layers": layers(model)}
    (HERE / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")
    with open(HERE / f"{name}_test.jsonl", "w") as f:
        for x, y in zip(x_test, y_test):
            f.write(json.dumps({"values": x.tolist(), "label": int(y)}) + "\n")
    golden[name] = logits.tolist()
    acc = accuracy(model, x_test, y_test)
    print(f"{name}: held-out accuracy {acc:.3f} on {len(y_test)} sequences")


def main():
    torch.manual_seed(7)
    rng = np.random.default_rng(7)
    golden = {}

    x, y = noise_dataset(rng, 120)
    xt, yt = noise_dataset(rng, 8)
    x, xt = np.round(x, 6), np.round(xt, 6)
    net = train(LstmNet(2, 4, 3), x, y)
    export(
        "noise_lstm_tiny",
        net,
        lambda m: [lstm_layer(m.lstm), fc_layer(m.fc)],
        2,
        ["white", "brown", "pink"],
        xt,
        yt,
        golden,
    )

    x, y = vowel_dataset(rng, 120)
    xt, yt = vowel_dataset(rng, 8)
    x, xt = np.round(x, 6), np.round(xt, 6)
    net = train(CnnLstmNet(3, 4, 3, 3), x, y)
    export(
        "vowel_cnn_lstm_tiny",
        net,
        lambda m: [conv_layer(m.conv), {"kind": "relu"}, lstm_layer(m.lstm), fc_layer(m.fc)],
        3,
        ["a", "i", "u"],
        xt,
        yt,
        golden,
    )

    x, y = blob_dataset(rng, 120)
    xt, yt = blob_dataset(rng, 8)
    x, xt = np.round(x, 6), np.round(xt, 6)
    net = train(FcNet(2, 6, 3), x, y)
    export(
        "fc_toy",
        net,
        lambda m: [fc_layer(m.fc1), {"kind": "relu"}, fc_layer(m.fc2)],
        2,
        ["left", "right", "top"],
        xt,
        yt,
        golden,
    )

    (HERE / "golden_forward.json").write_text(json.dumps(golden, indent=1) + "\n")


if __name__ == "__main__":
    main()
