// First Past the Post
// Which Boolean operator is exclusive-or?
method Xor(a : bool, b : bool) returns (t : bool)
  ensures t == ((a || b) && !(a && b))
{
  t := a != b;
}
