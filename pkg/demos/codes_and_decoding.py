"""Walk through the four [[9,1,3]] compass codes and their lookup decoders.

    python demos/codes_and_decoding.py
"""

from compass_sim import PauliOperator, build_code
from compass_sim.codes import CODE_NAMES, N_DATA
from compass_sim.decoder import build_lookup, decode, residual_after_decoding

# %% Each code is a gauge fixing of the 3x3 compass model on 9 data qubits.
for name in CODE_NAMES:
    code = build_code(name)
    print(f"{name}: {code.num_stabilizers} stabilizers, {code.n_qubits} ions including ancillas")
    for s, kind in zip(code.stabilizers, code.types):
        print(f"   {kind}  {s.to_string()}")
    print(f"   logical X = {code.logical_x.to_string()}, logical Z = {code.logical_z.to_string()}")
    print(f"   checks: {'all pass' if all(code.check().values()) else code.check()}")

# %% Weight-two X errors show how gauge structure shapes what the decoder sees.
print()
for name, err in [("BaconShor13", "X0X1"), ("BaconShor13", "X0X3"), ("Shor6X2Z", "X0X1"), ("Surface17", "X0X1")]:
    code = build_code(name)
    e = PauliOperator.from_string(err, N_DATA)
    corr = decode(build_lookup(code), code.syndrome(e))
    print(f"{name:12s} {err}: syndrome {''.join(map(str, code.syndrome(e)))}, "
          f"correction {corr.to_string() or 'I'}, logical residual {residual_after_decoding(code, e)}")
