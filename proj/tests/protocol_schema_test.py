"""Validates mock-serve replies against docs/protocol/v1.schema.json from an independent client."""
import base64
import json
import re
import subprocess
import sys
import time
import urllib.error
import urllib.request

import jsonschema

binary, schema_path = sys.argv[1], sys.argv[2]
schema = json.load(open(schema_path))


def validator(name):
    return jsonschema.Draft202012Validator({"$defs": schema["$defs"], "$ref": "#/$defs/" + name})


def call(base, route, body=None):
    if body is None:
        req = urllib.request.Request(base + route)
    else:
        validator("Request").validate(body)
        req = urllib.request.Request(base + route, data=json.dumps(body).encode(), method="POST",
                                     headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read() or b"null")


proc = subprocess.Popen([binary, "mock-serve", "--port", "0", "--drift", "0.3"], stdout=subprocess.PIPE, text=True)
try:
    line = proc.stdout.readline()
    port = re.search(r":(\d+)$", line.strip()).group(1)
    base = "http://127.0.0.1:" + port
    scene = base64.b64encode(b"scene v1\nobject truck\nobject road\nattr red\n").decode()
    blank = base64.b64encode(b"scene v1\n").decode()

    status, r = call(base, "/health")
    assert status == 200, status
    validator("HealthReply").validate(r)

    status, r = call(base, "/caption", {"input": scene, "params": {"media_type": "text/x-scene"}, "seed": 1})
    assert status == 200, (status, r)
    validator("CaptionReply").validate(r)

    status, r = call(base, "/generate", {"input": r["result"], "params": {}, "seed": 42})
    assert status == 200, (status, r)
    validator("GenerateReply").validate(r)
    status, again = call(base, "/generate", {"input": "a red truck on a road", "params": {}, "seed": 42})
    status, twice = call(base, "/generate", {"input": "a red truck on a road", "params": {}, "seed": 42})
    assert again == twice, "generate is not deterministic for a fixed seed"

    status, r = call(base, "/labels", {"input": blank, "params": {"media_type": "text/x-scene"}, "seed": 1})
    assert status == 200 and r == {"ok": True, "result": []}, r

    for modality, data in (("text", "a red truck"), ("image", scene)):
        params = {"modality": modality}
        if modality == "image":
            params["media_type"] = "text/x-scene"
        status, r = call(base, "/embed", {"input": data, "params": params, "seed": 0})
        assert status == 200, (status, r)
        validator("EmbedReply").validate(r)

    for route, body in (("/generate", {"input": "", "params": {}, "seed": 1}),
                        ("/caption", {"input": "@@", "params": {}, "seed": 1}),
                        ("/embed", {"input": "x", "params": {"modality": "smell"}, "seed": 1})):
        status, r = call(base, route, body)
        assert status == 400, (route, status)
        validator("Error").validate(r)

    status, _ = call(base, "/nowhere", {"input": "x", "params": {}, "seed": 1})
    assert status == 404, status
    print("all replies match the schema")
finally:
    proc.terminate()
    proc.wait(timeout=10)
