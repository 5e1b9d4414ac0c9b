method SumTo(n : nat) returns (s : nat)
  requires n < 1000
  // closed form
  ensures s == n * (n + 1) / 2
  ensures n == old(n)
{
  s := 0;
  var i := 0;
  while i < n
    invariant 0 <= i <= n
    invariant s == i * (i + 1) / 2
    decreases n - i
  {
    i := i + 1;
    s := s + i;
    if s > 100000 { return s; }
  }
  assume s >= 0;
}

class Cell {
  var v : int
  method Bump()
    modifies this
    ensures v == old(v) + 1
  {
    v := v + 1;
  }
}

function Twice(x : int) : int
  requires x >= 0
  ensures Twice(x) >= x
{ 2 * x }
