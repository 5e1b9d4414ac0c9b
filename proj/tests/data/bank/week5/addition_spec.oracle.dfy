method Add(a : int, b : int) returns (r : int)
  ensures r == a + b
{
  r := a + b;
}
