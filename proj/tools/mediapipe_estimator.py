#!/usr/bin/env python3
# Copyright (C) 2026 spoterkit contributors
# SPDX-License-Identifier: Apache-2.0
#
# MediaPipe Holistic behind the line protocol spoken by SubprocessEstimator.
#
#   export SPOTERKIT_ESTIMATOR="python3 tools/mediapipe_estimator.py"
#
# Handshake: one JSON line {"estimator", "version"} or {"error"}.
# Then per frame: "FRAME <w> <h> <c>\n" + w*h*c BGR bytes -> one JSON line with
# body (33 points), left_hand and right_hand (21 points each, or null).

import json
import sys


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def points(landmarks, with_visibility):
    if landmarks is None:
        return None
    out = []
    for lm in landmarks.landmark:
        if with_visibility:
            out.append([lm.x, lm.y, lm.visibility])
        else:
            out.append([lm.x, lm.y])
    return out


def main():
    try:
        import mediapipe as mp
        import numpy as np
    except ImportError as exc:
        emit({"error": "mediapipe is not installed: %s" % exc})
        return 1

    holistic = mp.solutions.holistic.Holistic(static_image_mode=False, model_complexity=1)
    emit({"estimator": "mediapipe-holistic", "version": getattr(mp, "__version__", "unknown")})

    stdin = sys.stdin.buffer
    while True:
        header = stdin.readline()
        if not header:
            break
        parts = header.decode("ascii").split()
        if len(parts) != 4 or parts[0] != "FRAME":
            emit({"error": "bad frame header"})
            return 1
        w, h, c = int(parts[1]), int(parts[2]), int(parts[3])
        data = stdin.read(w * h * c)
        if len(data) != w * h * c:
            break
        bgr = np.frombuffer(data, dtype=np.uint8).reshape(h, w, c)
        rgb = bgr[:, :, ::-1].copy() if c == 3 else np.repeat(bgr, 3, axis=2)
        res = holistic.process(rgb)
        # MediaPipe's "left" hand is the signer's left.
        emit({
            "body": points(res.pose_landmarks, True),
            "left_hand": points(res.left_hand_landmarks, False),
            "right_hand": points(res.right_hand_landmarks, False),
        })
    holistic.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
