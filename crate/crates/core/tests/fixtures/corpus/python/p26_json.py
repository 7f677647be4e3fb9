import json


def summarize(records):
    by_city = {}
    for rec in records:
        city = rec['city']
        by_city.setdefault(city, []).append(rec['age'])
    return {c: sum(a) / len(a) for c, a in by_city.items()}


payload = '[{"city": "oslo", "age": 30}, {"city": "rome", "age": 40}, {"city": "oslo", "age": 20}]'
records = json.loads(payload)
print(json.dumps(summarize(records), sort_keys=True))
