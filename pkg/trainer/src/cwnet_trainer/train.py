"""Training loop: Adam on the five-part objective over synthetic pairs.

Each step samples crops of (low, clean) plus light- and color-degraded
crops from other scenes as counterfactual negatives. The metric-ratio term
runs on the model's own encoder features; the prompt-contrast term labels
the enhanced output with y=0 so its low-light probability is pushed down.
"""

import torch

from . import data, losses
from .model import CwnetModel
from . import rng

PROMPT_LOW = "a photo of a low light scene"
PROMPT_NORMAL = "a photo of a well lit scene"


def _to_tensor(img):
    return torch.from_numpy(img).permute(2, 0, 1)


def _sample_batch(pairs, cfg, step):
    lows, cleans, light_negs, color_negs = [], [], [], []
    n = len(pairs)
    for b in range(cfg.batch_size):
        sub = rng.fold_seed(cfg.seed, step * 1009 + b)
        idx = int(rng.uniform_range(rng.fold_seed(sub, 1), (), 0, n))
        crop = data.random_crop_pair(pairs[idx], cfg.crop, rng.fold_seed(sub, 2))
        lows.append(_to_tensor(crop["low"]))
        cleans.append(_to_tensor(crop["clean"]))
        # two light and two color negatives per sample, from other scenes
        for k, bucket, key in ((3, light_negs, "low"), (4, color_negs, "color")):
            for j in range(2):
                other = int(rng.uniform_range(
                    rng.fold_seed(sub, 10 * k + j), (), 0, max(n - 1, 1)))
                if other >= idx and n > 1:
                    other += 1
                neg = data.random_crop_pair(
                    pairs[other % n], cfg.crop, rng.fold_seed(sub, 100 * k + j))
                bucket.append(_to_tensor(neg[key]))
    return (torch.stack(lows), torch.stack(cleans),
            torch.stack(light_negs), torch.stack(color_negs))


def _objective(model, batch, cfg, feature_net, encoders):
    lows, cleans, light_negs, color_negs = batch
    pre = model(lows)

    l2 = torch.nn.functional.mse_loss(pre, cleans)
    structure = losses.ssim_loss(pre, cleans)
    perceptual = losses.perceptual_loss(pre, cleans, feature_net)

    # anchor features keep gradients; reference/negative features act as
    # fixed targets (saves the backward pass through 5x as many encodes)
    k = lows.shape[0]
    anchor = model.features(pre)
    with torch.no_grad():
        ref = model.features(torch.cat([cleans, light_negs, color_negs], dim=0))
    positive = ref[:k]
    ln = ref[k:k + light_negs.shape[0]]
    cn = ref[k + light_negs.shape[0]:]
    # negatives were appended two per sample: strided views give L=2, C=2
    causal = losses.causal_metric_loss(
        anchor, positive, [ln[0::2], ln[1::2]], [cn[0::2], cn[1::2]])

    image_encoder, text_encoder = encoders
    sem_batch = losses.SemanticBatch(
        image=pre[0],
        masks=losses.grid_masks(pre.shape[-2], pre.shape[-1], 2, 2),
        prompt_low=PROMPT_LOW, prompt_normal=PROMPT_NORMAL, label=0.0)
    semantic = losses.semantic_clip_loss(sem_batch, image_encoder, text_encoder)

    w = cfg.weights
    total = (w[0] * l2 + w[1] * structure + w[2] * perceptual
             + w[3] * causal + w[4] * semantic)
    parts = {"l2": l2, "ssim": structure, "perceptual": perceptual,
             "causal": causal, "semantic": semantic, "total": total}
    return total, {name: float(v.detach()) for name, v in parts.items()}


def train(cfg, pairs):
    """Run the loop; returns (weights dict, history).

    history carries 'initial' and 'final' objective values measured on a
    fixed probe batch, plus the per-iteration component log. Raises
    RuntimeError if the objective becomes non-finite.
    """
    torch.manual_seed(cfg.seed)
    model = CwnetModel(cfg.network, init_seed=cfg.seed)
    feature_net = losses.FrozenFeatureNet(seed=cfg.seed)
    encoders = (losses.ToyImageEncoder(seed=cfg.seed),
                losses.ToyTextEncoder(seed=cfg.seed))
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate,
                                 betas=cfg.betas)

    probe = _sample_batch(pairs, cfg, step=-1)
    with torch.no_grad():
        _, initial = _objective(model, probe, cfg, feature_net, encoders)

    log = []
    for step in range(cfg.iterations):
        batch = _sample_batch(pairs, cfg, step)
        total, parts = _objective(model, batch, cfg, feature_net, encoders)
        if not torch.isfinite(total):
            raise RuntimeError(
                f"objective diverged at iteration {step}: {parts}")
        optimizer.zero_grad()
        total.backward()
        optimizer.step()
        log.append(parts)

    with torch.no_grad():
        _, final = _objective(model, probe, cfg, feature_net, encoders)
    history = {"initial": initial, "final": final, "log": log}
    return model.export(), history
