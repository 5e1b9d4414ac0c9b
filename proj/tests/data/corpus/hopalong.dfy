//insert a decreases clause so Dafny can prove termination
function hopalong(q: int, x : int, y : int, z : int) : int
  [???]
{
 var modulo := (x + y + z) % 3;

q + if (y <= 0) || (z <= 0) || (x <= 0) then 0 else 
if (modulo == 0) then (hopalong(q+1, x + 3, y - 1, z + 2))
   else if (modulo == 1) then (hopalong(q+3, x - 3, y , z - 1))
   else (hopalong(q+5, x + 2, y, z - 10))
}
