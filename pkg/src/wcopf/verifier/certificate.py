"""Serializable verification certificates.

Documents are plain dicts rendered with sorted keys and repr floats, so
identical runs write byte-identical files.
"""

import json


def certificate_document(cert, model_sha256=None, extras=None):
    doc = {
        "v_g": float(cert.value),
        "bound": float(cert.bound),
        "gap": float(cert.gap),
        "status": cert.status,
        "nodes_explored": int(cert.nodes_explored),
        "constraint": None,
        "witness": None,
        "pattern": None,
    }
    if cert.constraint_id is not None:
        g, side = cert.constraint_id
        doc["constraint"] = {"generator": int(g), "side": side}
        doc["witness"] = [float(v) for v in cert.witness]
        doc["pattern"] = [[int(b) for b in layer] for layer in cert.pattern]
    if model_sha256 is not None:
        doc["model_sha256"] = model_sha256
    if extras:
        doc.update(extras)
    return doc


def certificate_json(cert, model_sha256=None, extras=None):
    doc = certificate_document(cert, model_sha256=model_sha256, extras=extras)
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_certificate(path, cert, model_sha256=None, extras=None):
    text = certificate_json(cert, model_sha256=model_sha256, extras=extras)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return text
