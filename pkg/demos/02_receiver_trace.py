"""One receiver answering a range query on a short cycle."""

from rbo.protocol import QueryInterval, cycle_new, energies, run, target_bounds

keys = [2, 3, 5, 7, 11, 13, 17, 19]
cycle = cycle_new(keys)
q = QueryInterval(4, 12)

print("broadcast order:", [cycle.keys[i] for i in (0, 4, 2, 6, 1, 5, 3, 7)])
print("target indices:", target_bounds(cycle, q))

trace = run(cycle, q, s=1)
for ev in trace.events:
    print(ev.slot, ev.index, ev.key, ev.kind.value)

print("lb history:", trace.lb_history)
print("ub history:", trace.ub_history)
print(energies(trace))

# a query that hits nothing: the window closes and the receiver stops early
empty = run(cycle, QueryInterval(8, 10), s=0)
print([(ev.slot, ev.kind.value) for ev in empty.events], "done at", empty.done_slot)
